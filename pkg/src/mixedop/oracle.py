"""Dense matrix of an operator on the staircase subspace.

Every operator maps staircase functions to staircase functions, so it acts on
the ``D = M p^N`` dimensional span of cell indicators times unit vectors. The
matrix is assembled directly from the kernels (no use of ``compose`` or
``apply``), and the dense linear algebra is LAPACK through numpy, so it stays
independent of the code paths it checks. The map to matrices is an algebra
homomorphism but not injective, so equality of images never implies equality
of operators.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .algebra import MixedOperator
from .errors import SingularMatrix, SizeCapExceeded
from .staircase import complement

DEFAULT_MAX_DIM = 512


def max_dim() -> int:
    return int(os.environ.get("MIXEDOP_MAX_ORACLE_DIM", DEFAULT_MAX_DIM))


@dataclass(frozen=True)
class FullMatrixRep:
    N: int
    M: int
    p: int
    matrix: np.ndarray

    @property
    def D(self) -> int:
        return self.matrix.shape[0]


def _cap(D: int, cap: int | None):
    cap = max_dim() if cap is None else cap
    if D > cap:
        raise SizeCapExceeded(f"oracle dimension {D} exceeds cap {cap} (set MIXEDOP_MAX_ORACLE_DIM)")


def full_matrix(A: MixedOperator, cap: int | None = None) -> FullMatrixRep:
    """``F[(t,i),(t',j)] = sum_alpha [t', t agree off alpha] h^|alpha| A_alpha[t, t'_alpha]_ij``."""
    N, M, p = A.dims()
    D = M * p ** N
    _cap(D, cap)
    F = np.zeros((p,) * N + (M,) + (p,) * N + (M,), dtype=np.complex128)
    grids = np.indices((p,) * N + (p,) * N, sparse=True)
    for alpha, K in A.terms.items():
        k = len(alpha)
        # K[t..., s..., i, j] -> [t..., i, t'..., j] with t'-axes of alpha taken from s
        Kt = np.moveaxis(K, N + k, N)  # (t..., i, s..., j)
        shape = [p] * N + [M] + [p if d in alpha else 1 for d in range(1, N + 1)] + [M]
        Kt = Kt.reshape(shape)
        mask = np.ones((p,) * N + (p,) * N, dtype=bool)
        for d in complement(alpha, N):
            mask = mask & (grids[d - 1] == grids[N + d - 1])
        mask = mask.reshape((p,) * N + (1,) + (p,) * N + (1,))
        F += (1.0 / p) ** k * np.where(mask, Kt, 0.0)
    return FullMatrixRep(N, M, p, F.reshape(D, D))


def _as_matrix(F) -> np.ndarray:
    return F.matrix if isinstance(F, FullMatrixRep) else np.asarray(F, dtype=np.complex128)


def oracle_det(F) -> complex:
    m = _as_matrix(F)
    _cap(m.shape[0], None)
    return complex(np.linalg.det(m))


def oracle_eigenvalues(F) -> np.ndarray:
    m = _as_matrix(F)
    _cap(m.shape[0], None)
    return np.linalg.eigvals(m)


def oracle_inverse(F) -> np.ndarray:
    m = _as_matrix(F)
    _cap(m.shape[0], None)
    if m.shape[0] and np.linalg.cond(m) > 1e14:
        raise SingularMatrix("oracle matrix is numerically singular")
    try:
        return np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
