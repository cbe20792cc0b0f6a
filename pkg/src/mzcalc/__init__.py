"""Simulator of computation with Mach-Zehnder interferometers.

Factoring by interference (single loop and cascades), its error
tolerance and physical limits, and Fourier coefficients from a phase
ramp, each in expectation and in particle-counting form.
"""
__version__ = "0.1.0"

from .core import Phase, PhaseSchedule, Port, detect_probability, phase_at_step
from .factor import (
    Classification,
    FactorTestResult,
    classify_intensity,
    cosine_sum,
    factorize,
    run_factor_test,
    run_perturbed_test,
    tolerance_bound,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "Classification",
    "FactorTestResult",
    "Phase",
    "PhaseSchedule",
    "Port",
    "classify_intensity",
    "cosine_sum",
    "detect_probability",
    "factorize",
    "phase_at_step",
    "run_factor_test",
    "run_perturbed_test",
    "tolerance_bound",
]
