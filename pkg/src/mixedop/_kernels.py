"""Hot inner loops: batched LU with a scale-aware singularity test, and the
Fredholm sum over index tuples.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy version
that runs the same algorithm vectorized over the batch axis. The numba path is
used when numba imports and ``MIXEDOP_DISABLE_NUMBA`` is unset (or 0/false).
``set_backend`` switches at runtime; tests and the benchmark drive both.
"""
from __future__ import annotations

import itertools
import math
import os

import numpy as np

# pivot is singular when |pivot| <= PIVOT_RTOL * max|active entries of its row|
PIVOT_RTOL = 1e-12

try:
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get("MIXEDOP_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


_backend = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


# -- numpy implementations ---------------------------------------------------

def lu_factor_np(a, rtol=PIVOT_RTOL):
    lu = np.array(a, dtype=np.complex128, copy=True)
    B, n, _ = lu.shape
    piv = np.zeros((B, n), dtype=np.int64)
    sing = np.zeros(B, dtype=bool)
    rows = np.arange(B)
    for k in range(n):
        best = np.argmax(np.abs(lu[:, k:, k]), axis=1) + k
        piv[:, k] = best
        tmp = lu[rows, k, :].copy()
        lu[rows, k, :] = lu[rows, best, :]
        lu[rows, best, :] = tmp
        pivot = lu[:, k, k]
        apiv = np.abs(pivot)
        rowmax = np.abs(lu[:, k, k:]).max(axis=1)
        sing |= apiv <= rtol * rowmax
        if k + 1 == n:
            break
        zero = apiv == 0.0
        f = lu[:, k + 1:, k] / np.where(zero, 1.0, pivot)[:, None]
        f[zero] = 0.0
        lu[:, k + 1:, k] = f
        lu[:, k + 1:, k + 1:] -= f[:, :, None] * lu[:, k, None, k + 1:]
    return lu, piv, sing


def lu_det_np(lu, piv):
    n = lu.shape[1]
    d = np.prod(np.diagonal(lu, axis1=1, axis2=2), axis=1)
    swaps = np.count_nonzero(piv != np.arange(n), axis=1)
    return np.where(swaps % 2 == 1, -d, d)


def lu_inverse_np(lu, piv):
    B, n, _ = lu.shape
    x = np.broadcast_to(np.eye(n, dtype=np.complex128), (B, n, n)).copy()
    rows = np.arange(B)
    for k in range(n):
        tmp = x[rows, k, :].copy()
        x[rows, k, :] = x[rows, piv[:, k], :]
        x[rows, piv[:, k], :] = tmp
    for k in range(n):
        x[:, k + 1:, :] -= lu[:, k + 1:, k, None] * x[:, k, None, :]
    for k in range(n - 1, -1, -1):
        x[:, k, :] /= lu[:, k, k, None]
        x[:, :k, :] -= lu[:, :k, k, None] * x[:, k, None, :]
    return x


def injective_tuples(R, n):
    """Number of ordered n-tuples of distinct indices from range(R)."""
    return math.perm(R, n)


def fredholm_sum_np(kmat, n_max, hk, chunk=1 << 15):
    B, R, _ = kmat.shape
    out = np.ones(B, dtype=np.complex128)
    for n in range(1, min(n_max, R) + 1):
        coef = hk ** n / math.factorial(n)
        acc = np.zeros(B, dtype=np.complex128)
        it = itertools.permutations(range(R), n)
        while True:
            block = np.array(list(itertools.islice(it, chunk)), dtype=np.int64).reshape(-1, n)
            if not len(block):
                break
            for b in range(B):
                sub = kmat[b][block[:, :, None], block[:, None, :]]
                acc[b] += lu_det_np(*lu_factor_np(sub)[:2]).sum()
        out += coef * acc
    return out


# -- numba implementations ---------------------------------------------------

if HAVE_NUMBA:

    @nb.njit(cache=True)
    def _lu_inplace(a, piv, rtol):
        n = a.shape[0]
        sing = False
        for k in range(n):
            best = k
            bv = abs(a[k, k])
            for r in range(k + 1, n):
                v = abs(a[r, k])
                if v > bv:
                    best = r
                    bv = v
            piv[k] = best
            if best != k:
                for c in range(n):
                    tmp = a[k, c]
                    a[k, c] = a[best, c]
                    a[best, c] = tmp
            rowmax = 0.0
            for c in range(k, n):
                v = abs(a[k, c])
                if v > rowmax:
                    rowmax = v
            if bv <= rtol * rowmax:
                sing = True
            if bv == 0.0:
                continue
            inv = 1.0 / a[k, k]
            for r in range(k + 1, n):
                f = a[r, k] * inv
                a[r, k] = f
                for c in range(k + 1, n):
                    a[r, c] -= f * a[k, c]
        return sing

    @nb.njit(cache=True)
    def lu_factor_nb(a, rtol=PIVOT_RTOL):
        B, n, _ = a.shape
        lu = a.astype(np.complex128)
        piv = np.zeros((B, n), dtype=np.int64)
        sing = np.zeros(B, dtype=np.bool_)
        for b in range(B):
            sing[b] = _lu_inplace(lu[b], piv[b], rtol)
        return lu, piv, sing

    @nb.njit(cache=True)
    def _det_from_lu(a, piv):
        d = 1.0 + 0.0j
        for k in range(a.shape[0]):
            d *= a[k, k]
            if piv[k] != k:
                d = -d
        return d

    @nb.njit(cache=True)
    def lu_det_nb(lu, piv):
        B = lu.shape[0]
        out = np.empty(B, dtype=np.complex128)
        for b in range(B):
            out[b] = _det_from_lu(lu[b], piv[b])
        return out

    @nb.njit(cache=True)
    def lu_inverse_nb(lu, piv):
        B, n, _ = lu.shape
        out = np.zeros((B, n, n), dtype=np.complex128)
        for b in range(B):
            x = out[b]
            for i in range(n):
                x[i, i] = 1.0
            for k in range(n):
                p = piv[b, k]
                if p != k:
                    for c in range(n):
                        tmp = x[k, c]
                        x[k, c] = x[p, c]
                        x[p, c] = tmp
            for k in range(n):
                for r in range(k + 1, n):
                    f = lu[b, r, k]
                    if f != 0.0:
                        for c in range(n):
                            x[r, c] -= f * x[k, c]
            for k in range(n - 1, -1, -1):
                inv = 1.0 / lu[b, k, k]
                for c in range(n):
                    x[k, c] *= inv
                for r in range(k):
                    f = lu[b, r, k]
                    if f != 0.0:
                        for c in range(n):
                            x[r, c] -= f * x[k, c]
        return out

    @nb.njit(cache=True)
    def fredholm_sum_nb(kmat, n_max, hk):
        B, R, _ = kmat.shape
        out = np.ones(B, dtype=np.complex128)
        for b in range(B):
            fact = 1.0
            for n in range(1, min(n_max, R) + 1):
                fact *= n
                coef = hk ** n / fact
                work = np.empty((n, n), dtype=np.complex128)
                piv = np.empty(n, dtype=np.int64)
                s = np.full(n, -1, dtype=np.int64)
                used = np.zeros(R, dtype=np.bool_)
                acc = 0.0 + 0.0j
                # depth-first walk over ordered tuples of distinct indices
                level = 0
                while level >= 0:
                    if s[level] >= 0:
                        used[s[level]] = False
                    v = s[level] + 1
                    while v < R and used[v]:
                        v += 1
                    if v == R:
                        s[level] = -1
                        level -= 1
                        continue
                    s[level] = v
                    used[v] = True
                    if level < n - 1:
                        level += 1
                        continue
                    for a in range(n):
                        for c in range(n):
                            work[a, c] = kmat[b, s[a], s[c]]
                    _lu_inplace(work, piv, 0.0)
                    acc += _det_from_lu(work, piv)
                out[b] += coef * acc
        return out


# -- dispatch ----------------------------------------------------------------

def lu_factor(a):
    """Batched LU with partial pivoting on ``(B, n, n)``; returns ``(lu, piv, singular)``."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[1] == 0:
        B = a.shape[0]
        return a.copy(), np.zeros((B, 0), np.int64), np.zeros(B, bool)
    if _backend == "numba":
        return lu_factor_nb(a, PIVOT_RTOL)
    return lu_factor_np(a)


def lu_det(lu, piv):
    if _backend == "numba":
        return lu_det_nb(lu, piv)
    return lu_det_np(lu, piv)


def lu_inverse(lu, piv):
    if _backend == "numba":
        return lu_inverse_nb(lu, piv)
    return lu_inverse_np(lu, piv)


def batch_det(a):
    lu, piv, _ = lu_factor(a)
    return lu_det(lu, piv)


def fredholm_sum(kmat, n_max, hk):
    """Fredholm series ``1 + sum_n hk^n/n! sum_{i_1..i_n} det(kmat[i_a, i_b])`` per batch entry.

    Index tuples with a repeated entry have two equal rows and contribute
    exactly zero, so only tuples of distinct indices are enumerated.
    """
    kmat = np.ascontiguousarray(kmat, dtype=np.complex128)
    if _backend == "numba":
        return fredholm_sum_nb(kmat, int(n_max), float(hk))
    return fredholm_sum_np(kmat, int(n_max), float(hk))
