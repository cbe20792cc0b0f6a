"""Physical limits of interferometric factoring.

Setting the largest phase ``2 pi N`` needs a path difference of ``N``
wavelengths, which must stay within the coherence length
``C = lambda**2 / delta_lambda``.  Costs are counted in phase settings;
converting to seconds needs a dwell time per setting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidBandwidth

# Quotients within this relative distance of an integer snap to it, so that
# decimal inputs such as 5 / 500e-9 are not floored to 9999999.
_SNAP = 1e-9


@dataclass(frozen=True)
class SourceSpec:
    wavelength_lambda: float
    bandwidth_delta_lambda: float

    def __post_init__(self):
        lam, dlam = self.wavelength_lambda, self.bandwidth_delta_lambda
        if not (lam > 0 and math.isfinite(lam)):
            raise InvalidBandwidth(f"wavelength must be positive, got {lam}")
        if not 0 < dlam < lam:
            raise InvalidBandwidth(f"bandwidth must satisfy 0 < dlambda < lambda, got {dlam}")

    @classmethod
    def from_coherence(cls, wavelength: float, coherence_length: float) -> SourceSpec:
        if not coherence_length > wavelength > 0:
            raise InvalidBandwidth("coherence length must exceed the wavelength")
        return cls(wavelength, wavelength**2 / coherence_length)


def coherence_length(src: SourceSpec) -> float:
    return src.wavelength_lambda**2 / src.bandwidth_delta_lambda


def _floor_snapped(x: float) -> int:
    r = round(x)
    if abs(x - r) <= _SNAP * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def max_factorable(src: SourceSpec) -> int:
    """floor(C / lambda): the largest N whose 2 pi N phase stays coherent."""
    return _floor_snapped(coherence_length(src) / src.wavelength_lambda)


def step_count(n: int, N: int) -> int:
    """Phase settings needed to test candidate n: one per increment up to n N."""
    if n < 2 or N < n:
        raise ValueError(f"need 2 <= n <= N, got n={n}, N={N}")
    return n * N


def worst_case(N: int) -> int:
    """Cost of the largest candidate, isqrt(N) * N, which grows as N**1.5."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    return math.isqrt(N) * N


def total_steps(N: int) -> int:
    """Phase settings for a full scan n = 2..isqrt(N)."""
    r = math.isqrt(N)
    return N * (r * (r + 1) // 2 - 1) if r >= 2 else 0


def envelope_visibility(N: int, src: SourceSpec) -> float:
    """Gaussian fringe-contrast decay exp(-(N lambda / C)**2 / 2).

    Exploratory only: the envelope shape is an assumption, not part of
    the hard coherence cutoff used by :func:`max_factorable`.
    """
    x = N * src.wavelength_lambda / coherence_length(src)
    return math.exp(-0.5 * x * x)


@dataclass(frozen=True)
class FeasibilityReport:
    source: SourceSpec
    coherence_length_C: float
    max_N: int
    worst_case_steps: int
    worst_case_exponent: float = 1.5
    dwell_time: Optional[float] = None
    warnings: tuple = field(default=())

    def steps_for_candidate(self, n: int, N: int) -> int:
        return step_count(n, N)

    @property
    def worst_case_seconds(self) -> Optional[float]:
        if self.dwell_time is None:
            return None
        return self.worst_case_steps * self.dwell_time


def feasibility_report(src: SourceSpec, dwell_time: Optional[float] = None) -> FeasibilityReport:
    C = coherence_length(src)
    max_n = max_factorable(src)
    warnings = []
    if max_n < 2:
        warnings.append("degenerate: coherence length is under two wavelengths, nothing can be factored")
    return FeasibilityReport(
        source=src,
        coherence_length_C=C,
        max_N=max_n,
        worst_case_steps=worst_case(max_n),
        dwell_time=dwell_time,
        warnings=tuple(warnings),
    )
