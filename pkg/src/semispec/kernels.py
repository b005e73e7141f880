"""Sturm-sequence kernels for symmetric tridiagonal matrices.

Two implementations of the same arithmetic: numba-compiled loops and a numpy
version vectorized over the shifts.  ``_accel.HAS_NUMBA`` picks the default;
both are importable so the benchmark and tests can compare them.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAS_NUMBA, njit

_PIVMIN = 1e-280


# ---------------------------------------------------------------- numba

@njit(cache=True)
def _count_one(d, off2, sigma):
    # negative pivots of LDL^T of T - sigma I = eigenvalues below sigma
    count = 0
    q = d[0] - sigma
    if abs(q) < _PIVMIN:
        q = -_PIVMIN
    if q < 0.0:
        count += 1
    for i in range(1, d.shape[0]):
        q = (d[i] - sigma) - off2[i - 1] / q
        if abs(q) < _PIVMIN:
            q = -_PIVMIN
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def sturm_counts_numba(d, off2, shifts):
    out = np.empty(shifts.shape[0], dtype=np.int64)
    for k in range(shifts.shape[0]):
        out[k] = _count_one(d, off2, shifts[k])
    return out


@njit(cache=True)
def bisect_numba(d, off2, lo, hi, k_lo, k_hi, tol):
    m = k_hi - k_lo
    out = np.empty(m)
    for j in range(m):
        k = k_lo + j
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if _count_one(d, off2, mid) > k:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
    return out


# ---------------------------------------------------------------- numpy

def sturm_counts_numpy(d, off2, shifts):
    shifts = np.asarray(shifts, dtype=float)
    q = d[0] - shifts
    q = np.where(np.abs(q) < _PIVMIN, -_PIVMIN, q)
    count = (q < 0.0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = (d[i] - shifts) - off2[i - 1] / q
        q = np.where(np.abs(q) < _PIVMIN, -_PIVMIN, q)
        count += q < 0.0
    return count


def bisect_numpy(d, off2, lo, hi, k_lo, k_hi, tol):
    ks = np.arange(k_lo, k_hi)
    a = np.full(ks.shape, float(lo))
    b = np.full(ks.shape, float(hi))
    while ks.size:
        active = (b - a) > tol
        mid = 0.5 * (a + b)
        active &= (mid > a) & (mid < b)
        if not active.any():
            break
        c = sturm_counts_numpy(d, off2, mid[active])
        upper = c > ks[active]
        ia = np.flatnonzero(active)
        b[ia[upper]] = mid[active][upper]
        a[ia[~upper]] = mid[active][~upper]
    return 0.5 * (a + b)


# ---------------------------------------------------------------- dispatch

def sturm_counts(d, off2, shifts, backend: str | None = None):
    d = np.ascontiguousarray(d, dtype=float)
    off2 = np.ascontiguousarray(off2, dtype=float)
    shifts = np.ascontiguousarray(np.atleast_1d(shifts), dtype=float)
    if _use_numba(backend):
        return sturm_counts_numba(d, off2, shifts)
    return sturm_counts_numpy(d, off2, shifts)


def bisect_eigenvalues(d, off2, lo, hi, tol, backend: str | None = None):
    """All eigenvalues in (lo, hi] to absolute tolerance ``tol``."""
    d = np.ascontiguousarray(d, dtype=float)
    off2 = np.ascontiguousarray(off2, dtype=float)
    c = sturm_counts(d, off2, np.array([lo, hi]), backend)
    k_lo, k_hi = int(c[0]), int(c[1])
    if k_hi <= k_lo:
        return np.empty(0), k_lo, k_hi
    if _use_numba(backend):
        vals = bisect_numba(d, off2, float(lo), float(hi), k_lo, k_hi, float(tol))
    else:
        vals = bisect_numpy(d, off2, lo, hi, k_lo, k_hi, tol)
    return np.sort(vals), k_lo, k_hi


def _use_numba(backend):
    if backend is None:
        return HAS_NUMBA
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")
