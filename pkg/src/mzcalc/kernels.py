"""Backend selection for the summation kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise
the pure-Python ``_pykernels`` twin.  Setting ``MZCALC_PURE_PYTHON=1``
forces the fallback.  ``BACKEND`` names the active one.

The wrappers below do the exact integer pre-reduction (``N mod n``,
``offset mod n``) so the kernels only ever see small residues, whatever
the size of N.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np

from . import _pykernels

_impl = _pykernels
BACKEND = "python"
if os.environ.get("MZCALC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

_EXACT_FLOAT_LIMIT = 2**53


def available_backends() -> dict:
    """Map backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def residue_sum(n: int, N: int, offset: int, K: int, v: float = 1.0, impl=None) -> float:
    """Sum of bright-port probabilities at increments ``kN + offset``, k = 1..K,
    for a loop stepping ``2 pi / n`` per increment."""
    impl = impl or _impl
    return impl.residue_sum(n, N % n, offset % n, K, float(v))


def residue_probs(n: int, N: int, offset: int, K: int, v: float = 1.0, impl=None) -> np.ndarray:
    impl = impl or _impl
    out = np.empty(K, dtype=np.float64)
    impl.residue_probs(n, N % n, offset % n, float(v), out)
    return out


def perturbed_sum(n: int, d: float, N: int, offset: int, K: int, v: float = 1.0, impl=None) -> float:
    """Like :func:`residue_sum` with increment ``2 pi / (n + d)``.

    The period is the double nearest ``n + d``; its phases are then exact.
    ``fmod`` reduces in double precision while ``K N + offset`` fits in 53
    bits, rational arithmetic takes over beyond that.
    """
    impl = impl or _impl
    period_f = float(n + d)
    if K * N + offset < _EXACT_FLOAT_LIMIT:
        return impl.perturbed_sum(period_f, float(N), float(offset), K, float(v))
    period = Fraction(period_f)
    total = 0.0
    for k in range(1, K + 1):
        q = Fraction(k * N + offset) / period
        frac = q - math.floor(q)
        total += 0.5 * (1.0 + v * math.cos(2.0 * math.pi * float(frac)))
    return total


def path_sum(ns, signs, N: int, offset: int, K: int, impl=None) -> float:
    """Sum over k = 1..K of the product of per-loop port probabilities.

    Every loop on the path is read at the same increment ``kN + offset``.
    ``signs`` holds +1 for a bright-port traversal, -1 for dark.
    """
    impl = impl or _impl
    ns_a = np.ascontiguousarray(ns, dtype=np.int64)
    nm = np.array([N % int(n) for n in ns], dtype=np.int64)
    om = np.array([offset % int(n) for n in ns], dtype=np.int64)
    sg = np.ascontiguousarray(signs, dtype=np.float64)
    if impl is _pykernels:
        return impl.path_sum(ns_a.tolist(), nm.tolist(), om.tolist(), sg.tolist(), K)
    return impl.path_sum(ns_a, nm, om, sg, K)
