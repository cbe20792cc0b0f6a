import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzcalc.errors import DegenerateSchedule, InvalidCandidate, OutOfRangeL
from mzcalc.factor import (
    Classification,
    classify_intensity,
    cosine_sum,
    deviation_for_deficit,
    factorize,
    run_factor_test,
    run_perturbed_test,
    tolerance_bound,
    total_phase_settings,
    trial_scan,
)

F, NF = Classification.FACTOR, Classification.NON_FACTOR


def brute_cosine_sum(L, n):
    return sum(math.cos(2 * math.pi * L * k / n) for k in range(1, n + 1))


def trial_division(N):
    return [n for n in range(2, math.isqrt(N) + 1) if N % n == 0]


@pytest.mark.parametrize("L, n, expected", [(0, 7, 7.0), (3, 4, 0.0), (1, 2, 0.0)])
def test_cosine_sum_examples(L, n, expected):
    assert cosine_sum(L, n) == pytest.approx(expected, abs=1e-9)
    assert brute_cosine_sum(L, n) == pytest.approx(expected, abs=1e-9)


@given(st.integers(1, 400), st.data())
def test_cosine_sum_roots_of_unity(n, data):
    L = data.draw(st.integers(0, n - 1))
    got = cosine_sum(L, n)
    assert got == pytest.approx(brute_cosine_sum(L, n), abs=1e-9)
    assert got == pytest.approx(n if L == 0 else 0.0, abs=1e-9)


@pytest.mark.parametrize("L, n", [(-1, 4), (4, 4), (0, 0)])
def test_cosine_sum_out_of_range(L, n):
    with pytest.raises(OutOfRangeL):
        cosine_sum(L, n)


@pytest.mark.parametrize(
    "N, n, intensity, cls",
    [(15, 3, 3.0, F), (15, 4, 2.0, NF), (6, 6, 6.0, F)],
)
def test_run_factor_test_examples(N, n, intensity, cls):
    r = run_factor_test(N, n)
    assert r.intensity == pytest.approx(intensity, abs=1e-9)
    assert r.classification is cls
    assert r.remainder_L == N % n
    assert r.steps_used == n
    assert r.phase_settings == n * N


@pytest.mark.parametrize("N, n", [(15, 1), (15, 16), (1, 1)])
def test_invalid_candidate(N, n):
    with pytest.raises(InvalidCandidate):
        run_factor_test(N, n)


@given(st.integers(2, 2000), st.data())
@settings(max_examples=300)
def test_dichotomy_and_decomposition(N, data):
    n = data.draw(st.integers(2, N))
    r = run_factor_test(N, n)
    divides = N % n == 0
    assert r.intensity == pytest.approx(n if divides else n / 2, abs=1e-9)
    assert r.is_factor == divides
    assert r.intensity == pytest.approx(n / 2 + 0.5 * cosine_sum(N % n, n), abs=1e-9)
    assert 0 <= r.intensity <= r.steps_used


@given(st.integers(2, 500), st.data(), st.floats(0, 1))
def test_visibility_scaling(N, data, v):
    n = data.draw(st.integers(2, N))
    full = run_factor_test(N, n).intensity
    part = run_factor_test(N, n, v=v).intensity
    assert part - n / 2 == pytest.approx(v * (full - n / 2), abs=1e-9)


@pytest.mark.parametrize(
    "intensity, steps, cls",
    [(5, 5, F), (2.5, 5, NF), (4.09, 5, F), (3.75, 5, NF)],
)
def test_classify_examples(intensity, steps, cls):
    assert classify_intensity(intensity, steps) is cls


def test_perturbed_unperturbed_case():
    assert run_perturbed_test(20, 5, 0.0).intensity == pytest.approx(5.0, abs=1e-12)


def test_perturbed_quarter_turn_deficit_n5():
    d = deviation_for_deficit(20, 5)
    assert d == pytest.approx(5 / 79, rel=1e-14)
    r = run_perturbed_test(20, 5, d)
    # 40-digit brute-force sum with the same d
    assert r.intensity == pytest.approx(3.828437878668760774744866, abs=1e-9)
    assert r.intensity < 5
    assert r.classification is F


@pytest.mark.parametrize(
    "n, expected",
    [
        (20, 16.11292489483926973305390),
        (50, 40.66418529071789524875060),
        (100, 81.58033411721803639511615),
    ],
)
def test_perturbed_quarter_turn_deficit_large_n(n, expected):
    N = 1000
    r = run_perturbed_test(N, n, deviation_for_deficit(N, n))
    assert r.intensity == pytest.approx(expected, abs=1e-8)
    assert r.intensity == pytest.approx(n * (0.5 + 1 / math.pi), rel=0.05)


def test_perturbed_degenerate():
    with pytest.raises(DegenerateSchedule):
        run_perturbed_test(20, 5, -5.0)


@given(st.integers(2, 60), st.integers(1, 40), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=200)
def test_monotone_degradation(n, m, a, b):
    N = n * m
    if N < 2:
        return
    dmax = n / (4 * N)
    d1, d2 = sorted((a * dmax, b * dmax))
    i1 = run_perturbed_test(N, n, d1).intensity
    i2 = run_perturbed_test(N, n, d2).intensity
    assert i1 >= i2 - 1e-12
    assert i2 <= n + 1e-12
    # n(1/2 + 1/pi) is the large-n floor; very short loops sit below it
    if n >= 8:
        assert i2 >= n * (0.5 + 1 / math.pi) * 0.95
    if n >= 4:
        assert run_perturbed_test(N, n, d2).classification is F


@pytest.mark.parametrize("n", [2, 3])
def test_short_loops_can_misclassify_at_full_tolerance(n):
    N = 10 * n
    assert run_perturbed_test(N, n, n / (4 * N)).classification is NF


@pytest.mark.parametrize("N, bound", [(10**7, 2.5e-8), (1, 0.25), (25, 0.01)])
def test_tolerance_bound(N, bound):
    assert tolerance_bound(N) == bound


@pytest.mark.parametrize("N, found", [(35, [5]), (13, []), (16, [2, 4])])
def test_factorize_examples(N, found):
    hits = factorize(N)
    assert [n for n, _ in hits] == found == trial_division(N)
    for n, r in hits:
        assert r.cofactor == N // n


def test_factorize_35_cofactor_and_cost():
    (n, r), = factorize(35)
    assert (n, r.cofactor) == (5, 7)
    scan = trial_scan(35)
    assert total_phase_settings(scan) == sum(m * 35 for m in range(2, 6))


@given(st.integers(2, 5000))
@settings(max_examples=200)
def test_factorize_matches_trial_division(N):
    assert [n for n, _ in factorize(N)] == trial_division(N)


def test_cost_model_scaling():
    # largest single candidate costs isqrt(N) * N phase settings
    worst = {N: max(r.phase_settings for r in trial_scan(N)) for N in (10**2, 10**4)}
    assert worst[10**2] == 10 * 100
    assert worst[10**4] / worst[10**2] == pytest.approx((10**4 / 10**2) ** 1.5)


def test_threaded_scan_identical():
    assert trial_scan(9240, threads=4) == trial_scan(9240)


def test_large_N_exact():
    N = 9_999_991 * 3  # 3 * a prime below 1e7
    assert run_factor_test(N, 3).intensity == 3.0
    assert run_factor_test(N, 9_999_991).intensity == 9_999_991.0
    assert run_factor_test(N, 1000).intensity == pytest.approx(500.0, abs=1e-9)
