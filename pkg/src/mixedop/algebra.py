"""Mixed integral operators with staircase kernels and their algebra.

An operator is a sum over subsets ``alpha`` of terms

    (A_alpha u)(k) = integral over x_alpha of A_alpha(k, x_alpha) u(k_rest, x_alpha)

where ``k_rest`` keeps the coordinates outside ``alpha``. With staircase
kernels every integral is a finite sum with weight h^|alpha| per cell, so all
operations below are exact up to rounding.
"""
from __future__ import annotations

import math
from functools import lru_cache
from string import ascii_letters
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, MalformedInput
from .staircase import (
    StaircaseFunction,
    Subset,
    as_subset,
    kernel_shape,
    refine_array,
    subsets_ascending,
)

# coefficients at or below this magnitude are structural zeros
ZERO_CUTOFF = 1e-300


class MixedOperator:
    """Immutable element of the operator algebra at resolution ``p``.

    ``terms`` maps a sorted subset tuple to its kernel array; absent keys are
    zero terms. Kernels that are entirely zero are dropped on construction.
    """

    __slots__ = ("N", "M", "p", "_terms")

    def __init__(self, N: int, M: int, p: int, terms: Mapping[Subset, np.ndarray] | None = None):
        if N < 1 or M < 1 or p < 1:
            raise MalformedInput("N, M, p must be positive")
        self.N, self.M, self.p = int(N), int(M), int(p)
        clean = {}
        for alpha, K in (terms or {}).items():
            alpha = as_subset(alpha, self.N)
            K = np.array(K, dtype=np.complex128)
            shape = kernel_shape(self.N, self.M, self.p, alpha)
            if K.shape != shape:
                raise DimensionMismatch(f"kernel for {alpha} has shape {K.shape}, expected {shape}")
            if not np.all(np.isfinite(K)):
                raise MalformedInput(f"kernel for {alpha} has non-finite entries")
            K[np.abs(K) <= ZERO_CUTOFF] = 0.0
            if np.any(K):
                K.setflags(write=False)
                clean[alpha] = K
        self._terms = dict(sorted(clean.items(), key=lambda kv: (len(kv[0]), kv[0])))

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def h(self) -> float:
        return 1.0 / self.p

    def term(self, alpha) -> np.ndarray:
        """Kernel of ``alpha`` (a zero array when the term is absent)."""
        alpha = as_subset(alpha, self.N)
        K = self._terms.get(alpha)
        if K is None:
            return np.zeros(kernel_shape(self.N, self.M, self.p, alpha), dtype=np.complex128)
        return K

    def dims(self) -> tuple:
        return (self.N, self.M, self.p)

    def __repr__(self):
        subs = ", ".join(str(list(a)) for a in self._terms)
        return f"MixedOperator(N={self.N}, M={self.M}, p={self.p}, terms=[{subs}])"

    # operator sugar; the functional API below is canonical
    def __add__(self, other):
        return linear_combine(1.0, self, 1.0, other)

    def __sub__(self, other):
        return linear_combine(1.0, self, -1.0, other)

    def __neg__(self):
        return scale(-1.0, self)

    def __matmul__(self, other):
        return compose(self, other)


def _check_same(A: MixedOperator, B: MixedOperator) -> None:
    if A.dims() != B.dims():
        raise DimensionMismatch(f"operands have (N, M, p) = {A.dims()} and {B.dims()}")


def zero_operator(N: int, M: int, p: int) -> MixedOperator:
    return MixedOperator(N, M, p)


def identity_operator(N: int, M: int, p: int) -> MixedOperator:
    K = np.broadcast_to(np.eye(M, dtype=np.complex128), kernel_shape(N, M, p, ()))
    return MixedOperator(N, M, p, {(): K})


def multiplication_operator(N: int, M: int, p: int, values) -> MixedOperator:
    """Operator with only the empty-subset term; ``values`` broadcast to ``(p,)*N + (M, M)``."""
    K = np.broadcast_to(np.asarray(values, dtype=np.complex128), kernel_shape(N, M, p, ()))
    return MixedOperator(N, M, p, {(): K})


def scale(lam: complex, A: MixedOperator) -> MixedOperator:
    return MixedOperator(A.N, A.M, A.p, {a: lam * K for a, K in A._terms.items()})


def linear_combine(lam: complex, A: MixedOperator, mu: complex, B: MixedOperator) -> MixedOperator:
    _check_same(A, B)
    out = {}
    for alpha in set(A._terms) | set(B._terms):
        out[alpha] = lam * A.term(alpha) + mu * B.term(alpha)
    return MixedOperator(A.N, A.M, A.p, out)


# -- einsum subscripts --------------------------------------------------------

def _letters(N):
    # t_d, x_d, z_d for each dimension, then i, k, j
    pool = iter(ascii_letters)
    t = [next(pool) for _ in range(N)]
    x = [next(pool) for _ in range(N)]
    z = [next(pool) for _ in range(N)]
    return t, x, z, next(pool), next(pool), next(pool)


@lru_cache(maxsize=None)
def _compose_subscripts(N: int, gamma: Subset, delta: Subset) -> str:
    t, x, z, i, k, j = _letters(N)
    both = set(gamma) & set(delta)
    a_sub = "".join(t) + "".join(z[d - 1] if d in both else x[d - 1] for d in gamma) + i + k
    b_t = "".join(t[d - 1] if d not in gamma else (z[d - 1] if d in both else x[d - 1])
                  for d in range(1, N + 1))
    b_sub = b_t + "".join(x[d - 1] for d in delta) + k + j
    union = sorted(set(gamma) | set(delta))
    out = "".join(t) + "".join(x[d - 1] for d in union) + i + j
    return f"{a_sub},{b_sub}->{out}"


@lru_cache(maxsize=None)
def _apply_subscripts(N: int, alpha: Subset) -> str:
    t, x, _, i, _, j = _letters(N)
    k_sub = "".join(t) + "".join(x[d - 1] for d in alpha) + i + j
    u_sub = "".join(x[d - 1] if d in alpha else t[d - 1] for d in range(1, N + 1)) + j
    return f"{k_sub},{u_sub}->{''.join(t)}{i}"


def compose_terms(N: int, h: float, gamma: Subset, A: np.ndarray, delta: Subset, B: np.ndarray):
    """Kernel of the product of the gamma-term ``A`` and the delta-term ``B``; lands on gamma|delta."""
    w = h ** len(set(gamma) & set(delta))
    return w * np.einsum(_compose_subscripts(N, gamma, delta), A, B, optimize=False)


def compose(A: MixedOperator, B: MixedOperator) -> MixedOperator:
    """Operator product ``A B`` (apply ``B`` first)."""
    _check_same(A, B)
    N, h = A.N, A.h
    acc: dict = {}
    for gamma, KA in A._terms.items():
        for delta, KB in B._terms.items():
            union = tuple(sorted(set(gamma) | set(delta)))
            term = compose_terms(N, h, gamma, KA, delta, KB)
            if union in acc:
                acc[union] += term
            else:
                acc[union] = term
    return MixedOperator(N, A.M, A.p, acc)


def apply(A: MixedOperator, u: StaircaseFunction) -> StaircaseFunction:
    if (A.N, A.M, A.p) != (u.N, u.M, u.p):
        raise DimensionMismatch(f"operator {A.dims()} vs function {(u.N, u.M, u.p)}")
    out = np.zeros_like(u.values)
    for alpha, K in A._terms.items():
        out += A.h ** len(alpha) * np.einsum(_apply_subscripts(A.N, alpha), K, u.values)
    return StaircaseFunction(u.N, u.M, u.p, out)


def term_norm(K: np.ndarray) -> float:
    """Max over cells of the max-row-sum matrix norm."""
    if K.size == 0:
        return 0.0
    return float(np.abs(K).sum(axis=-1).max())


def norm_L(A: MixedOperator) -> float:
    return float(sum(term_norm(K) for K in A._terms.values()))


def operator_equal(A: MixedOperator, B: MixedOperator, tol: float = 0.0) -> bool:
    d = norm_L(linear_combine(1.0, A, -1.0, B))
    return d <= tol * max(1.0, norm_L(A), norm_L(B))


def exp_operator(A: MixedOperator, tol: float = 1e-15) -> MixedOperator:
    """Truncated exponential series, stopped by the Banach-algebra remainder bound."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = norm_L(A)
    total = identity_operator(A.N, A.M, A.p)
    term = total
    K = 0
    # smallest K with a^K / K! * e^a <= tol; the partial sum runs through K
    while a ** K / math.factorial(K) * math.exp(a) > tol:
        K += 1
    for n in range(1, K + 1):
        term = scale(1.0 / n, compose(term, A))
        total = linear_combine(1.0, total, 1.0, term)
    return total


def power(A: MixedOperator, n: int) -> MixedOperator:
    out = identity_operator(A.N, A.M, A.p)
    for _ in range(n):
        out = compose(out, A)
    return out


def refine_operator(A: MixedOperator, q: int) -> MixedOperator:
    """Same operator on L^2, represented at resolution ``p*q``."""
    if q < 1:
        raise ValueError("refinement factor must be >= 1")
    if q == 1:
        return A
    terms = {a: refine_array(K, q, A.N + len(a)) for a, K in A._terms.items()}
    return MixedOperator(A.N, A.M, A.p * q, terms)


def to_common_resolution(*ops: MixedOperator):
    """Refine all operands to the lcm of their resolutions."""
    p = math.lcm(*(op.p for op in ops))
    return tuple(refine_operator(op, p // op.p) for op in ops)


def from_function(N: int, M: int, p: int, fn, subsets=None) -> MixedOperator:
    """Sample ``fn(alpha, k_cells, x_cells) -> (M, M)`` at every cell; handy for building examples."""
    subsets = subsets_ascending(N) if subsets is None else [as_subset(s, N) for s in subsets]
    terms = {}
    for alpha in subsets:
        shape = kernel_shape(N, M, p, alpha)
        K = np.empty(shape, dtype=np.complex128)
        for idx in np.ndindex(*shape[:-2]):
            K[idx] = fn(alpha, idx[:N], idx[N:])
        terms[alpha] = K
    return MixedOperator(N, M, p, terms)
