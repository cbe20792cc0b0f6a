"""Pure-Python summation kernels.

Reference twin of ``_ckernels.pyx``: same signatures, same operation
order, same libm calls, so both backends agree to the last bit on
IEEE-754 platforms.  All sums run in ascending ``k``.

Residue arguments are pre-reduced by the caller: ``nmod = N % n`` and
``offmod = offset % n``.  The observed increment at step ``k`` is then
``r_k = (offmod + k * nmod) % n``, tracked incrementally.
"""
import math

TWO_PI = 2.0 * math.pi


def _cos_turn(r, n):
    # cos(2 pi r / n) with the argument folded into [0, pi]
    if 2 * r > n:
        r = n - r
    return math.cos(TWO_PI * r / n)


def residue_sum(n, nmod, offmod, K, v):
    """Sum over k = 1..K of (1 + v cos(2 pi r_k / n)) / 2."""
    total = 0.0
    r = offmod
    for _ in range(K):
        r += nmod
        if r >= n:
            r -= n
        total += 0.5 * (1.0 + v * _cos_turn(r, n))
    return total


def residue_probs(n, nmod, offmod, v, out):
    """Fill ``out[k-1]`` with the bright-port probability at step k."""
    r = offmod
    for i in range(len(out)):
        r += nmod
        if r >= n:
            r -= n
        out[i] = 0.5 * (1.0 + v * _cos_turn(r, n))


def perturbed_sum(period, N, offset, K, v):
    """Sum over k of (1 + v cos(2 pi (kN + offset) / period)) / 2.

    ``N`` and ``offset`` are floats holding exact integers; ``kN + offset``
    must stay below 2**53 so that ``fmod`` sees the exact increment.
    """
    total = 0.0
    for k in range(1, K + 1):
        j = k * N + offset
        rem = math.fmod(j, period)
        total += 0.5 * (1.0 + v * math.cos(TWO_PI * rem / period))
    return total


def path_sum(ns, nmods, offmods, signs, K):
    """Sum over k of the product over loops of (1 + s_j cos(2 pi r_jk / n_j)) / 2."""
    m = len(ns)
    rs = [offmods[i] for i in range(m)]
    total = 0.0
    for _ in range(K):
        p = 1.0
        for i in range(m):
            r = rs[i] + nmods[i]
            if r >= ns[i]:
                r -= ns[i]
            rs[i] = r
            p *= 0.5 * (1.0 + signs[i] * _cos_turn(r, ns[i]))
        total += p
    return total
