# cython: language_level=3
"""Compiled summation kernels; see ``_pykernels`` for the contract."""
from libc.math cimport cos, fmod, M_PI

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _cos_turn(long long r, long long n) noexcept nogil:
    if 2 * r > n:
        r = n - r
    return cos(TWO_PI * <double>r / <double>n)


def residue_sum(long long n, long long nmod, long long offmod, long long K, double v):
    cdef double total = 0.0
    cdef long long r = offmod
    cdef long long i
    with nogil:
        for i in range(K):
            r += nmod
            if r >= n:
                r -= n
            total += 0.5 * (1.0 + v * _cos_turn(r, n))
    return total


def residue_probs(long long n, long long nmod, long long offmod, double v, double[::1] out):
    cdef long long r = offmod
    cdef Py_ssize_t i
    with nogil:
        for i in range(out.shape[0]):
            r += nmod
            if r >= n:
                r -= n
            out[i] = 0.5 * (1.0 + v * _cos_turn(r, n))


def perturbed_sum(double period, double N, double offset, long long K, double v):
    cdef double total = 0.0
    cdef double j, rem
    cdef long long k
    with nogil:
        for k in range(1, K + 1):
            j = k * N + offset
            rem = fmod(j, period)
            total += 0.5 * (1.0 + v * cos(TWO_PI * rem / period))
    return total


def path_sum(const long long[::1] ns, const long long[::1] nmods,
             const long long[::1] offmods, const double[::1] signs, long long K):
    cdef Py_ssize_t m = ns.shape[0]
    cdef Py_ssize_t i
    cdef long long k, r
    cdef double p, total = 0.0
    cdef long long[64] rs
    if m > 64:
        raise ValueError("path deeper than 64 loops")
    for i in range(m):
        rs[i] = offmods[i]
    with nogil:
        for k in range(K):
            p = 1.0
            for i in range(m):
                r = rs[i] + nmods[i]
                if r >= ns[i]:
                    r -= ns[i]
                rs[i] = r
                p *= 0.5 * (1.0 + signs[i] * _cos_turn(r, ns[i]))
            total += p
    return total
