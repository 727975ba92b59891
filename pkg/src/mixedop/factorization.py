"""Factorization of invertible operators into elementary factors.

An invertible operator is written as the ordered product

    A = G_0 G_{1} G_{2} ... G_{1..N}

over subsets in ascending order, where ``G_0`` multiplies by a matrix
function and every other factor is identity plus a single term. Each
elementary factor ``I + <K .>_alpha`` has a staircase kernel, so it separates
as ``C(k) D(x)`` with rank ``r = M p^|alpha|``; its inverse and invertibility
are decided by the r x r matrices ``E(k_rest) = I + h^|alpha| sum_s D(s) C(k_rest, s)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .algebra import (
    MixedOperator,
    compose,
    identity_operator,
    linear_combine,
    multiplication_operator,
    norm_L,
)
from .errors import EmptySubset, MalformedInput, ResidueNotIdentity, SingularBlock, SingularE
from .staircase import Subset, as_subset, complement, kernel_shape, subsets_ascending

RESIDUE_RTOL = 1e-10


# -- block layout -------------------------------------------------------------

def _split_perm(N: int, alpha: Subset) -> list:
    """Axis order putting k-axes outside alpha first, then k-axes in alpha, then s, i, j."""
    k = len(alpha)
    rest = [d - 1 for d in complement(alpha, N)]
    inside = [d - 1 for d in alpha]
    return rest + inside + list(range(N, N + k)) + [N + k, N + k + 1]


def kernel_blocks(K: np.ndarray, N: int, M: int, p: int, alpha: Subset) -> np.ndarray:
    """Rearrange a kernel over ``alpha`` into ``(p^(N-|alpha|), r, r)`` matrices.

    Entry ``[b, (s, i), (s', j)]`` is ``K[k_rest(b) + s, s']_{ij}``.
    """
    k = len(alpha)
    B, P = p ** (N - k), p ** k
    Kp = K.transpose(_split_perm(N, alpha)).reshape(B, P, P, M, M)
    return Kp.transpose(0, 1, 3, 2, 4).reshape(B, P * M, P * M)


def blocks_to_kernel(mats: np.ndarray, N: int, M: int, p: int, alpha: Subset) -> np.ndarray:
    """Inverse of :func:`kernel_blocks`."""
    k = len(alpha)
    B, P = p ** (N - k), p ** k
    H = mats.reshape(B, P, M, P, M).transpose(0, 1, 3, 2, 4)
    H = H.reshape((p,) * (N - k) + (p,) * k + (p,) * k + (M, M))
    return H.transpose(np.argsort(_split_perm(N, alpha)))


def _first_cell(flags: np.ndarray, shape: tuple) -> tuple:
    b = int(np.flatnonzero(flags)[0])
    return tuple(int(c) for c in np.unravel_index(b, shape)) if shape else ()


# -- separation of variables --------------------------------------------------

@dataclass(frozen=True)
class SeparatedKernel:
    """``K[t, s] = C[t] @ D[s]`` with C of shape ``(p,)*N + (M, r)`` and D of shape ``(p,)*|alpha| + (r, M)``."""
    alpha: Subset
    C: np.ndarray
    D: np.ndarray

    @property
    def rank(self) -> int:
        return self.C.shape[-1]

    def reconstruct(self) -> np.ndarray:
        N = self.C.ndim - 2
        k = len(self.alpha)
        Cb = self.C.reshape(self.C.shape[:N] + (1,) * k + self.C.shape[-2:])
        return Cb @ self.D


def separate_variables(K: np.ndarray, alpha: Subset) -> SeparatedKernel:
    alpha = tuple(alpha)
    if not alpha:
        raise EmptySubset("separation of variables needs a nonempty subset")
    k = len(alpha)
    N = K.ndim - 2 - k
    M = K.shape[-1]
    p = K.shape[0]
    P = p ** k
    r = P * M
    # C[t, i, (s, j)] = K[t, s, i, j]
    axes = list(range(N)) + [N + k] + list(range(N, N + k)) + [N + k + 1]
    C = K.transpose(axes).reshape((p,) * N + (M, r))
    # D[s] = e_s (x) I_M
    D = np.zeros((P, r, M), dtype=np.complex128)
    for s in range(P):
        D[s, s * M:(s + 1) * M, :] = np.eye(M)
    return SeparatedKernel(alpha, C, D.reshape((p,) * k + (r, M)))


@dataclass(frozen=True)
class EMatrixField:
    """One r x r matrix per cell of the complementary variables."""
    alpha: Subset
    cell_shape: tuple
    matrices: np.ndarray  # (n_cells, r, r)

    @property
    def rank(self) -> int:
        return self.matrices.shape[-1]

    def at(self, cell) -> np.ndarray:
        b = np.ravel_multi_index(tuple(cell), self.cell_shape) if self.cell_shape else 0
        return self.matrices[b]

    def dets(self) -> np.ndarray:
        return _kernels.batch_det(self.matrices).reshape(self.cell_shape)


def elementary_kernel(G: MixedOperator, alpha) -> np.ndarray:
    """Kernel of ``G = I + <K .>_alpha``; rejects operators that are not of this form."""
    alpha = as_subset(alpha, G.N)
    if not alpha:
        raise EmptySubset("use the block determinant for the empty subset")
    eye = identity_operator(G.N, G.M, G.p)
    for beta, K in G.terms.items():
        if beta == ():
            if not np.array_equal(K, eye.term(())):
                raise MalformedInput("elementary operator must have identity empty-subset term")
        elif beta != alpha:
            raise MalformedInput(f"elementary operator over {alpha} has a term over {beta}")
    if () not in G.terms:
        raise MalformedInput("elementary operator must contain the identity")
    return G.term(alpha)


def e_field(K: np.ndarray, N: int, M: int, p: int, alpha: Subset) -> EMatrixField:
    mats = (1.0 / p) ** len(alpha) * kernel_blocks(K, N, M, p, alpha)
    mats = mats + np.eye(mats.shape[-1])
    return EMatrixField(alpha, (p,) * (N - len(alpha)), mats)


def build_E(G: MixedOperator, alpha) -> EMatrixField:
    alpha = as_subset(alpha, G.N)
    return e_field(elementary_kernel(G, alpha), G.N, G.M, G.p, alpha)


def _elementary(N, M, p, alpha, K) -> MixedOperator:
    return MixedOperator(N, M, p, {(): np.broadcast_to(np.eye(M), kernel_shape(N, M, p, ())), alpha: K})


def _invert_elementary_kernel(K, N, M, p, alpha, partial=None):
    """Returns (inverse kernel, det values); raises SingularE on a singular E matrix."""
    field_ = e_field(K, N, M, p, alpha)
    lu, piv, sing = _kernels.lu_factor(field_.matrices)
    dets = _kernels.lu_det(lu, piv).reshape(field_.cell_shape)
    if sing.any():
        cell = _first_cell(sing, field_.cell_shape)
        part = dict(partial or {})
        part[alpha] = dets
        raise SingularE(f"elementary factor over {list(alpha)} is singular at cell {list(cell)}",
                        alpha=alpha, cell=cell, partial=part)
    Einv = _kernels.lu_inverse(lu, piv)
    H = -kernel_blocks(K, N, M, p, alpha) @ Einv
    return blocks_to_kernel(H, N, M, p, alpha), dets


def elementary_inverse(G: MixedOperator, alpha) -> MixedOperator:
    """Inverse of ``I + <K .>_alpha``, again of the form ``I + <H .>_alpha``."""
    alpha = as_subset(alpha, G.N)
    K = elementary_kernel(G, alpha)
    H, _ = _invert_elementary_kernel(K, G.N, G.M, G.p, alpha)
    return _elementary(G.N, G.M, G.p, alpha, H)


def _invert_blocks(K0, N, M, p):
    blocks = K0.reshape(-1, M, M)
    lu, piv, sing = _kernels.lu_factor(blocks)
    dets = _kernels.lu_det(lu, piv).reshape((p,) * N)
    if sing.any():
        cell = _first_cell(sing, (p,) * N)
        raise SingularBlock(f"multiplication block is singular at cell {list(cell)}",
                            alpha=(), cell=cell, partial={(): dets})
    return _kernels.lu_inverse(lu, piv).reshape(K0.shape), dets


# -- factorization ------------------------------------------------------------

@dataclass
class Factorization:
    """Ordered elementary factors; their product in list order is the source operator."""
    factors: list                     # [(alpha, G_alpha)]
    inverse_factors: list = field(default_factory=list)  # [(alpha, G_alpha^{-1})], same order
    dets: dict = field(default_factory=dict)             # alpha -> determinant component
    residue: float = 0.0

    def factor(self, alpha) -> MixedOperator:
        alpha = tuple(alpha)
        for a, G in self.factors:
            if a == alpha:
                return G
        raise KeyError(alpha)

    def recompose(self) -> MixedOperator:
        out = self.factors[0][1]
        for _, G in self.factors[1:]:
            out = compose(out, G)
        return out


def factorize(A: MixedOperator, check_residue: bool = True) -> Factorization:
    """Peel off G_0, then every subset in ascending order, from the left.

    After removing G_0, the alpha-term of the remaining operator is exactly the
    kernel of G_alpha, because every later factor only contributes to terms over
    other subsets. Multiplying by the inverse of G_alpha from the left removes
    that term and touches only terms over strict supersets of alpha.
    """
    N, M, p = A.dims()
    eye = identity_operator(N, M, p)
    K0inv, det0 = _invert_blocks(A.term(()), N, M, p)
    G0 = multiplication_operator(N, M, p, A.term(()))
    G0inv = multiplication_operator(N, M, p, K0inv)
    factors, inverses, dets = [((), G0)], [((), G0inv)], {(): det0}
    cur = compose(G0inv, A)
    for alpha in subsets_ascending(N)[1:]:
        K = cur.term(alpha)
        H, d = _invert_elementary_kernel(K, N, M, p, alpha, partial=dets)
        dets[alpha] = d
        Ginv = _elementary(N, M, p, alpha, H)
        factors.append((alpha, _elementary(N, M, p, alpha, K)))
        inverses.append((alpha, Ginv))
        cur = compose(Ginv, cur)
    residue = norm_L(linear_combine(1.0, cur, -1.0, eye))
    if check_residue and residue > RESIDUE_RTOL * (1.0 + norm_L(A)):
        raise ResidueNotIdentity(f"peel-off residue {residue:.3e} exceeds tolerance",
                                 alpha=alpha, partial=dets)
    return Factorization(factors, inverses, dets, residue)


def inverse(A: MixedOperator) -> MixedOperator:
    fac = factorize(A)
    inv = fac.inverse_factors
    out = inv[-1][1]
    for _, Ginv in reversed(inv[:-1]):
        out = compose(out, Ginv)
    return out
