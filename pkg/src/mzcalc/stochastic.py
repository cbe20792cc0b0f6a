"""Monte Carlo particle counting.

Each observation sends ``repetitions_per_step`` particles through the
apparatus and records which detector clicks.  The expected counts are
the deterministic engines' outputs; this module adds shot noise.

Random streams
--------------
Generator ``philox4x64-seedseq`` is numpy's Philox 4x64-10 counter-based
bit generator keyed by ``numpy.random.SeedSequence(entropy=seed,
spawn_key=(trial,))``.  Trial ``t`` of a batch always gets the same
stream whatever the thread count or execution order, and a single run
uses trial 0.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional

import numpy as np

from . import kernels
from .cascade import CascadeSpec, step_distribution
from .factor import Classification, _check_candidate, classify_intensity

GENERATOR_ID = "philox4x64-seedseq"


@dataclass(frozen=True)
class TrialConfig:
    repetitions_per_step: int = 1
    seed: int = 0
    generator_id: str = GENERATOR_ID

    def __post_init__(self):
        if self.repetitions_per_step < 1:
            raise ValueError(f"repetitions_per_step must be >= 1, got {self.repetitions_per_step}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.generator_id != GENERATOR_ID:
            raise ValueError(f"unsupported generator {self.generator_id!r}; only {GENERATOR_ID!r}")


def make_generator(seed: int, trial: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ClickRecord:
    """Clicks of all detectors at one observation instant.

    ``observed`` lists the detectors whose tallies read this instant.
    """

    k: int
    counts: dict  # detector -> clicks
    step: Optional[int] = None  # absolute increment index
    observed: tuple = ()


@dataclass
class SingleLoopRun:
    N: int
    n: int
    config: TrialConfig
    empirical_I: float
    stderr: float
    expected_I: float
    classification: Classification
    records: list = field(repr=False)


def simulate_single_loop(N: int, n: int, config: TrialConfig, trial: int = 0,
                         v: float = 1.0) -> SingleLoopRun:
    """Shot-noise version of the factor test.

    Detector A's click count at observation k is Binomial(R, p_k); the
    empirical intensity is the total A count divided by R.
    """
    _check_candidate(N, n)
    R = config.repetitions_per_step
    p = kernels.residue_probs(n, N, 0, n, v)
    rng = make_generator(config.seed, trial)
    a = rng.binomial(R, p)
    records = [
        ClickRecord(k, {"A": int(c), "B": R - int(c)}, k * N, ("A", "B"))
        for k, c in enumerate(a, start=1)
    ]
    empirical = int(a.sum()) / R
    stderr = math.sqrt(float(np.sum(p * (1.0 - p))) / R)
    return SingleLoopRun(
        N, n, config, empirical, stderr, float(p.sum()),
        classify_intensity(empirical, n), records,
    )


def run_trials(N: int, n: int, config: TrialConfig, trials: int, threads: int = 1) -> list[SingleLoopRun]:
    """Independent repeats of :func:`simulate_single_loop`, trial order preserved."""
    def one(t):
        return simulate_single_loop(N, n, config, trial=t)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(trials)))
    return [one(t) for t in range(trials)]


def required_repetitions(n: int, confidence: float) -> int:
    """Particles per observation needed to separate n from n/2.

    Smallest R with R >= (z sqrt(n) / (n/4))**2 = 16 z**2 / n, where z is
    the two-sided standard normal quantile for ``confidence`` and 1/4 is
    the worst-case per-particle variance.  Never below 1.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    return max(1, math.ceil((z * math.sqrt(n) / (n / 4.0)) ** 2))


@dataclass
class CascadeRun:
    spec: CascadeSpec
    config: TrialConfig
    tallies: dict  # detector -> (empirical intensity, stderr)
    records: list = field(repr=False)


def simulate_cascade(spec: CascadeSpec, config: TrialConfig, trial: int = 0) -> CascadeRun:
    """Route R particles per observation instant through the loop tree.

    Detectors with different start delays are read at different
    increments, so each observation k may involve several instants
    ``offset + kN``.  At every instant the R particles are split over all
    detectors by one multinomial draw; a detector's tally only counts the
    instants that belong to it.  Instants are processed in ascending
    offset, then ascending k.
    """
    R = config.repetitions_per_step
    dets = spec.detectors
    rng = make_generator(config.seed, trial)
    by_offset: dict[int, list[str]] = {}
    for det in dets:
        by_offset.setdefault(spec.path(det).offset, []).append(det)
    horizons = {det: spec.horizon_for(det) for det in dets}

    clicks = {det: 0 for det in dets}
    var = {det: 0.0 for det in dets}
    records = []
    for offset in sorted(by_offset):
        own = by_offset[offset]
        K = max(horizons[d] for d in own)
        for k in range(1, K + 1):
            j = offset + k * spec.N
            dist = step_distribution(spec, j)
            probs = np.array([dist[d] for d in dets])
            # multinomial rejects sum(probs) > 1 by even one ulp
            draw = rng.multinomial(R, probs / probs.sum())
            counts = {det: int(c) for det, c in zip(dets, draw)}
            observed = tuple(d for d in own if k <= horizons[d])
            records.append(ClickRecord(k, counts, j, observed))
            for det in observed:
                clicks[det] += counts[det]
                var[det] += dist[det] * (1.0 - dist[det])
    tallies = {det: (clicks[det] / R, math.sqrt(var[det] / R)) for det in dets}
    return CascadeRun(spec, config, tallies, records)


def records_to_csv(records, config: TrialConfig) -> str:
    """CSV with columns k, detector, count under a ``# seed=... generator_id=...`` line.

    Only the detectors each record observes are written, so every
    (k, detector) pair appears once.
    """
    buf = io.StringIO()
    buf.write(f"# seed={config.seed} generator_id={config.generator_id} "
              f"repetitions_per_step={config.repetitions_per_step}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "detector", "count"])
    for rec in records:
        for det in sorted(rec.observed or rec.counts):
            w.writerow([rec.k, det, rec.counts[det]])
    return buf.getvalue()
