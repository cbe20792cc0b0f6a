"""Detection probabilities of a single Mach-Zehnder loop.

A loop with ideal 50/50 splitters and relative phase ``chi`` sends a
particle to the bright port with probability ``(1 + v cos chi) / 2`` and
to the dark port with ``(1 - v cos chi) / 2``, where ``v`` is the fringe
visibility.

Large phases
------------
Phase-step schedules reach ``2 pi N`` radians, about 6e7 for N = 1e7,
where a float carries only ~1e-8 rad of absolute resolution.  A
:class:`Phase` therefore keeps an exact rational number of turns next to
a float residual in radians.  Trig evaluation reduces the turns exactly
(``Fraction`` modulo 1) and combines the two parts with the angle-sum
identity, so adding whole turns never perturbs the result.  The float
residual is reduced by the C library, which does correctly-rounded
argument reduction for any finite double.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DegenerateSchedule, InvalidVisibility, NonFinitePhase

TWO_PI = 2.0 * math.pi


class Port(enum.Enum):
    BRIGHT = "bright"
    DARK = "dark"

    @property
    def sign(self) -> int:
        return 1 if self is Port.BRIGHT else -1


@dataclass(frozen=True)
class Phase:
    """Unreduced phase ``2 pi * turns + radians``.

    ``turns`` is exact; ``radians`` is a float residual.  Either part may
    be arbitrarily large.
    """

    radians: float = 0.0
    turns: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        if not math.isfinite(self.radians):
            raise NonFinitePhase(f"phase must be finite, got {self.radians!r}")
        if not isinstance(self.turns, Fraction):
            object.__setattr__(self, "turns", Fraction(self.turns))

    @classmethod
    def from_turns(cls, numerator, denominator=1) -> Phase:
        return cls(0.0, Fraction(numerator) / Fraction(denominator))

    @property
    def value(self) -> float:
        """Total phase in radians, rounded to a float."""
        return self.radians + TWO_PI * float(self.turns)

    def add_turns(self, turns) -> Phase:
        return Phase(self.radians, self.turns + Fraction(turns))

    def __add__(self, other):
        if isinstance(other, Phase):
            return Phase(self.radians + other.radians, self.turns + other.turns)
        if isinstance(other, (int, float)):
            return Phase(self.radians + other, self.turns)
        return NotImplemented

    __radd__ = __add__

    def cos(self) -> float:
        frac = self.turns - math.floor(self.turns)
        if frac == 0:
            return math.cos(self.radians)
        a = TWO_PI * float(frac)
        if self.radians == 0.0:
            return math.cos(a)
        b = self.radians
        return math.cos(a) * math.cos(b) - math.sin(a) * math.sin(b)


def _as_phase(chi) -> Phase:
    if isinstance(chi, Phase):
        return chi
    if isinstance(chi, Fraction):
        raise TypeError("pass rational phases as Phase.from_turns(...)")
    return Phase(float(chi))


def check_visibility(v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:  # NaN fails too
        raise InvalidVisibility(f"visibility must lie in [0, 1], got {v!r}")
    return v


def detect_probability(chi, port: Port = Port.BRIGHT, v: float = 1.0) -> float:
    """Probability that one particle leaves through ``port``.

    Parameters
    ----------
    chi : float or Phase
        Relative phase between the two arms, radians.
    port : Port
        ``Port.BRIGHT`` (detector A) or ``Port.DARK`` (detector B).
    v : float
        Fringe visibility in [0, 1]; 1 is the ideal interferometer.
    """
    v = check_visibility(v)
    c = _as_phase(chi).cos()
    if port is Port.BRIGHT:
        return 0.5 * (1.0 + v * c)
    # Written as 1 - bright so the two ports sum to 1 to the last bit.
    return 1.0 - 0.5 * (1.0 + v * c)


@dataclass(frozen=True)
class PhaseSchedule:
    """Discrete phase-step program for one loop.

    The shifter advances by ``2 pi / (n + d)`` per increment; observation
    ``k`` happens at increment ``k * N + offset``.
    """

    n: int
    N: int
    d: float = 0.0
    offset: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DegenerateSchedule(f"n must be >= 1, got {self.n}")
        if self.offset < 0:
            raise DegenerateSchedule(f"offset must be >= 0, got {self.offset}")
        if not math.isfinite(float(self.d)):
            raise DegenerateSchedule(f"deviation must be finite, got {self.d!r}")
        if self.n + self.d <= 0:
            raise DegenerateSchedule(f"n + d must be positive, got {self.n + self.d}")

    @property
    def period(self) -> Fraction:
        """Increments per full turn, ``n + d``, as an exact rational."""
        return self.n + Fraction(self.d)

    def increment_at(self, k: int) -> int:
        return k * self.N + self.offset


def phase_at_step(schedule: PhaseSchedule, k: int) -> Phase:
    """Phase seen at the ``k``-th observation, ``2 pi (kN + offset) / (n + d)``.

    The result is exact: float deviations are converted to their exact
    binary rational before dividing.
    """
    if k < 1:
        raise ValueError(f"observation index must be >= 1, got {k}")
    return Phase.from_turns(Fraction(schedule.increment_at(k)) / schedule.period)
