"""Single-loop factor test.

Observing detector A after every N increments of a ``2 pi / n`` phase
step, the expected count over n observations is

    I_n = n/2 + 1/2 * sum_{k=1..n} cos(2 pi k L / n),   L = N mod n,

which equals n when n divides N and exactly n/2 otherwise (the cosine
sum runs over all n-th roots of unity).
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from . import kernels
from .core import PhaseSchedule, check_visibility
from .errors import InvalidCandidate, OutOfRangeL

__all__ = [
    "Classification",
    "FactorTestResult",
    "PhaseSchedule",
    "classify_intensity",
    "cosine_sum",
    "deviation_for_deficit",
    "factorize",
    "run_factor_test",
    "run_perturbed_test",
    "tolerance_bound",
    "trial_scan",
]

FACTOR_THRESHOLD = 0.75


class Classification(enum.Enum):
    FACTOR = "Factor"
    NON_FACTOR = "NonFactor"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FactorTestResult:
    """Outcome of testing one candidate divisor.

    ``steps_used`` counts observations (the length of the detector-A sum);
    ``phase_settings`` counts phase-shifter increments stepped through,
    ``n * N + offset``.
    """

    N: int
    n: int
    intensity: float
    classification: Classification
    remainder_L: int
    steps_used: int
    phase_settings: int
    d: float = 0.0

    @property
    def is_factor(self) -> bool:
        return self.classification is Classification.FACTOR

    @property
    def cofactor(self) -> Optional[int]:
        return self.N // self.n if self.is_factor else None


def cosine_sum(L: int, n: int) -> float:
    """sum_{k=1..n} cos(2 pi L k / n): n for L = 0, 0 otherwise."""
    if n < 1:
        raise OutOfRangeL(f"n must be positive, got {n}")
    if not 0 <= L < n:
        raise OutOfRangeL(f"L must lie in [0, {n - 1}], got {L}")
    # residue_sum(n, L, 0, n, 1) = n/2 + cosine_sum / 2
    return 2.0 * kernels.residue_sum(n, L, 0, n, 1.0) - n


def classify_intensity(intensity: float, steps: int) -> Classification:
    """Factor iff intensity exceeds 3/4 of the step count.

    3/4 sits midway between the factor level (steps) and the non-factor
    level (steps / 2).
    """
    if intensity > FACTOR_THRESHOLD * steps:
        return Classification.FACTOR
    return Classification.NON_FACTOR


def _check_candidate(N: int, n: int) -> None:
    if N < 2:
        raise InvalidCandidate(f"N must be >= 2, got {N}")
    if not 2 <= n <= N:
        raise InvalidCandidate(f"candidate n must satisfy 2 <= n <= N={N}, got {n}")


def run_factor_test(N: int, n: int, v: float = 1.0, offset: int = 0) -> FactorTestResult:
    """Expected detector-A count for candidate ``n`` over n observations."""
    _check_candidate(N, n)
    v = check_visibility(v)
    intensity = kernels.residue_sum(n, N, offset, n, v)
    return FactorTestResult(
        N=N,
        n=n,
        intensity=intensity,
        classification=classify_intensity(intensity, n),
        remainder_L=N % n,
        steps_used=n,
        phase_settings=n * N + offset,
    )


def run_perturbed_test(N: int, n: int, d: float, v: float = 1.0, offset: int = 0) -> FactorTestResult:
    """Factor test with the increment mis-set to ``2 pi / (n + d)``."""
    _check_candidate(N, n)
    v = check_visibility(v)
    schedule = PhaseSchedule(n=n, N=N, d=d, offset=offset)  # raises DegenerateSchedule
    if d == 0:
        intensity = kernels.residue_sum(n, N, offset, n, v)
    else:
        intensity = kernels.perturbed_sum(n, schedule.d, N, offset, n, v)
    return FactorTestResult(
        N=N,
        n=n,
        intensity=intensity,
        classification=classify_intensity(intensity, n),
        remainder_L=N % n,
        steps_used=n,
        phase_settings=n * N + offset,
        d=float(d),
    )


def deviation_for_deficit(N: int, n: int, deficit: float = math.pi / 2) -> float:
    """Deviation d at which the last observation (k = n) falls ``deficit``
    radians short of ``2 pi N``; ``n / (4N - 1)`` for a quarter turn."""
    return n * N / (N - deficit / (2.0 * math.pi)) - n


def tolerance_bound(N: int) -> float:
    """Largest relative increment error |d/n| that keeps factors readable."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return 1.0 / (4 * N)


def trial_scan(N: int, v: float = 1.0, threads: int = 1) -> list[FactorTestResult]:
    """Run the factor test for every n in 2..isqrt(N), ordered by n."""
    if N < 2:
        raise InvalidCandidate(f"N must be >= 2, got {N}")
    candidates = range(2, math.isqrt(N) + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda n: run_factor_test(N, n, v), candidates))
    return [run_factor_test(N, n, v) for n in candidates]


def factorize(N: int, v: float = 1.0, threads: int = 1) -> list[tuple[int, FactorTestResult]]:
    """Divisors of N up to sqrt(N) found by interference, with their results.

    The cofactor of each hit is ``result.cofactor``.
    """
    return [(r.n, r) for r in trial_scan(N, v, threads) if r.is_factor]


def total_phase_settings(results) -> int:
    return sum(r.phase_settings for r in results)
