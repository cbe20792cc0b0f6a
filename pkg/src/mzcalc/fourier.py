"""Fourier coefficients from a linearly ramped interferometer.

With the incident intensity proportional to ``f(t)`` and the phase
ramped as ``chi(t) = 2 pi m t / tau + extra_phase``, the detector
difference integrated over one period is

    I_A - I_B = c * integral_0^tau f(t) cos(chi(t)) dt,

the m-th cosine coefficient for ``extra_phase = 0`` and the sine
coefficient for ``extra_phase = -pi/2``.

Integrals use composite Simpson on a uniform grid of ``points`` intervals
(default 4096, bumped to the next even number).  Sampled signals are
periodic and linearly interpolated, the last sample wrapping to the first.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from .core import check_visibility
from .errors import NegativeSignal, NonIntegrableSamples

DEFAULT_POINTS = 4096
PLANCK_H = 6.62607015e-34  # J s, exact in the 2019 SI
SPEED_OF_LIGHT = 299792458.0  # m/s, exact


@dataclass(frozen=True)
class PeriodicSignal:
    """Positive periodic function, closed form or uniform-ish samples.

    Exactly one of ``func`` (vectorized ``t -> f(t)``) and ``samples``
    (``(t, f)`` arrays over one period) is set.
    """

    period_tau: float
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sample_t: Optional[np.ndarray] = None
    sample_f: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        if not (self.period_tau > 0 and math.isfinite(self.period_tau)):
            raise ValueError(f"period must be positive and finite, got {self.period_tau}")
        if (self.func is None) == (self.sample_f is None):
            raise ValueError("give exactly one of func or samples")
        if self.sample_f is not None:
            if len(self.sample_f) < 2:
                raise NonIntegrableSamples(f"need at least 2 samples, got {len(self.sample_f)}")
            if len(self.sample_t) != len(self.sample_f):
                raise ValueError("t and f sample arrays differ in length")
            if np.any(np.asarray(self.sample_f) < 0):
                raise NegativeSignal("signal samples must be non-negative")

    @classmethod
    def from_function(cls, func, period_tau: float = 1.0, name: str = "") -> PeriodicSignal:
        return cls(period_tau, func=func, name=name)

    @classmethod
    def from_samples(cls, t, f, period_tau: Optional[float] = None) -> PeriodicSignal:
        """Samples over one period; ``period_tau`` defaults to the sample
        span plus one mean spacing."""
        t = np.asarray(t, dtype=float)
        f = np.asarray(f, dtype=float)
        if len(f) < 2:
            raise NonIntegrableSamples(f"need at least 2 samples, got {len(f)}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if period_tau is None:
            period_tau = float(t[-1] - t[0]) * len(t) / (len(t) - 1)
        return cls(period_tau, sample_t=t - t[0], sample_f=f)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.func is not None:
            return np.broadcast_to(np.asarray(self.func(t), dtype=float), t.shape)
        return np.interp(t, self.sample_t, self.sample_f, period=self.period_tau)


@dataclass(frozen=True)
class RampSpec:
    m: int
    extra_phase: float = 0.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"harmonic index m must be >= 1, got {self.m}")

    @classmethod
    def cosine(cls, m: int) -> RampSpec:
        return cls(m, 0.0)

    @classmethod
    def sine(cls, m: int) -> RampSpec:
        return cls(m, -math.pi / 2)

    def phase(self, t, tau: float):
        return 2.0 * math.pi * self.m * np.asarray(t) / tau + self.extra_phase


def _grid(tau: float, points: int) -> np.ndarray:
    if points < 2:
        raise NonIntegrableSamples(f"need at least 2 quadrature intervals, got {points}")
    points += points % 2
    return np.linspace(0.0, tau, points + 1)


def _values(signal: PeriodicSignal, t: np.ndarray) -> np.ndarray:
    f = signal(t)
    if np.any(f < 0):
        raise NegativeSignal(f"signal is negative at t = {t[np.argmax(f < 0)]:.6g}")
    return f


def detector_difference_trace(signal: PeriodicSignal, ramp: RampSpec, c: float = 1.0,
                              steps: int = DEFAULT_POINTS, v: float = 1.0):
    """Instantaneous ``I_A - I_B`` rate, ``c f(t) v cos chi(t)``, on the
    quadrature grid.  Returns ``(t, rate)`` arrays."""
    v = check_visibility(v)
    t = _grid(signal.period_tau, steps)
    rate = c * _values(signal, t) * v * np.cos(ramp.phase(t, signal.period_tau))
    return t, rate


def integrate_trace(t: np.ndarray, rate: np.ndarray) -> float:
    return float(simpson(rate, x=t))


def fourier_coefficient(signal: PeriodicSignal, ramp: RampSpec, c: float = 1.0,
                        points: int = DEFAULT_POINTS, v: float = 1.0) -> float:
    """``c * integral_0^tau f(t) cos(2 pi m t / tau + extra_phase) dt``."""
    return integrate_trace(*detector_difference_trace(signal, ramp, c, points, v))


def signal_integral(signal: PeriodicSignal, points: int = DEFAULT_POINTS) -> float:
    t = _grid(signal.period_tau, points)
    return float(simpson(_values(signal, t), x=t))


def _sample_arrivals(signal: PeriodicSignal, size: int, rng, points: int) -> np.ndarray:
    # Density proportional to the piecewise-linear interpolant of f on the grid:
    # pick a cell by its trapezoid mass, then invert the linear density inside it.
    t = _grid(signal.period_tau, points)
    f = _values(signal, t)
    h = t[1] - t[0]
    mass = 0.5 * (f[:-1] + f[1:]) * h
    cdf = np.cumsum(mass)
    if cdf[-1] <= 0:
        raise NegativeSignal("signal integrates to zero")
    u = rng.random(size) * cdf[-1]
    cell = np.minimum(np.searchsorted(cdf, u, side="right"), len(mass) - 1)
    area = u - (cdf[cell] - mass[cell])
    f0 = f[cell]
    slope = (f[cell + 1] - f0) / h
    # root of f0 x + slope x^2 / 2 = area in the cancellation-free form
    denom = f0 + np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * area, 0.0))
    x = 2.0 * area / np.where(denom > 0, denom, 1.0)
    return t[cell] + np.clip(x, 0.0, h)


def stochastic_fourier(signal: PeriodicSignal, ramp: RampSpec, total_particles: int, seed: int,
                       v: float = 1.0, points: int = DEFAULT_POINTS, trial: int = 0):
    """Particle-counting estimate of ``integral f cos(chi)`` (c = 1).

    Arrival times follow a density proportional to ``f``; each particle
    goes to A with probability ``(1 + v cos chi(t)) / 2``.  The estimate
    is ``(count_A - count_B) / total_particles * integral f``.  Returns
    ``(estimate, stderr)``.
    """
    from .stochastic import make_generator

    if total_particles < 1:
        raise ValueError(f"total_particles must be >= 1, got {total_particles}")
    v = check_visibility(v)
    rng = make_generator(seed, trial)
    arrivals = _sample_arrivals(signal, total_particles, rng, points)
    p_a = 0.5 * (1.0 + v * np.cos(ramp.phase(arrivals, signal.period_tau)))
    to_a = rng.random(total_particles) < p_a
    count_a = int(np.count_nonzero(to_a))
    count_b = total_particles - count_a
    norm = signal_integral(signal, points)
    mean = (count_a - count_b) / total_particles
    stderr = norm * math.sqrt(max(1.0 - mean * mean, 0.0) / total_particles)
    return norm * mean, stderr


@dataclass(frozen=True)
class AdiabaticityCheck:
    particle_energy_E: float
    ramp_rate: float  # m / tau, 1/s
    margin: float  # (m / tau) / (E / h)
    threshold: float

    @property
    def valid(self) -> bool:
        return self.margin < self.threshold


def check_adiabaticity(E: float, m: int, tau: float, threshold: float = 1e-3) -> AdiabaticityCheck:
    """Compare the ramp rate m/tau with the particle frequency E/h."""
    if E <= 0 or m <= 0 or tau <= 0 or threshold <= 0:
        raise ValueError("E, m, tau and threshold must all be positive")
    rate = m / tau
    return AdiabaticityCheck(E, rate, rate * PLANCK_H / E, threshold)


def photon_energy(wavelength: float) -> float:
    return PLANCK_H * SPEED_OF_LIGHT / wavelength


# -- built-in and CSV signals -------------------------------------------------

def _demo1(t):
    # tau = 1: cosine coefficient 1 at m = 1, sine coefficient 0.5 at m = 2
    return 3.0 + 2.0 * np.cos(2 * np.pi * t) + np.sin(4 * np.pi * t)


BUILTIN_SIGNALS = {
    "demo1": lambda: PeriodicSignal.from_function(_demo1, 1.0, "demo1"),
    "constant": lambda: PeriodicSignal.from_function(lambda t: np.ones_like(t), 1.0, "constant"),
    "expcos": lambda: PeriodicSignal.from_function(lambda t: np.exp(np.cos(2 * np.pi * t)), 1.0, "expcos"),
}


def builtin_signal(name: str) -> PeriodicSignal:
    try:
        return BUILTIN_SIGNALS[name]()
    except KeyError:
        raise ValueError(f"unknown built-in signal {name!r}; have {sorted(BUILTIN_SIGNALS)}") from None


def read_signal_csv(path, period_tau: Optional[float] = None) -> PeriodicSignal:
    """Load a ``t,f`` CSV (header row required) as a sampled signal."""
    ts, fs = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["t", "f"]:
            raise ValueError(f"{path}: expected header 't,f'")
        for lineno, row in enumerate(rows, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                ts.append(float(row[0]))
                fs.append(float(row[1]))
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}") from None
    return PeriodicSignal.from_samples(ts, fs, period_tau)


def write_trace_csv(fh, t, rate) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "difference_rate"])
    for ti, ri in zip(t, rate):
        w.writerow([repr(float(ti)), repr(float(ri))])
