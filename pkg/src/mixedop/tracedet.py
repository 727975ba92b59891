"""Vector-valued trace and determinant.

Both take values in the commutative algebra of tuples ``(f_alpha)`` where
``f_alpha`` is a scalar staircase function of the coordinates outside
``alpha`` (a plain number when ``alpha`` is the full set). All operations on
these tuples act componentwise.

Four routes to the determinant are provided. ``determinant`` (via the
factorization and E matrices) is the reference; ``det_fredholm``,
``det_plemelj_smithies`` and ``det_log_series`` are independent validators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .algebra import MixedOperator, compose, norm_L, _letters
from .errors import BudgetExceeded, DimensionMismatch, NormTooLarge, NotConverged
from .factorization import elementary_kernel, e_field, factorize, kernel_blocks
from .staircase import as_subset, cell_shape, complement, subsets_ascending

FREDHOLM_MAX_SUMMANDS = 10 ** 7


@dataclass(frozen=True)
class CElement:
    N: int
    M: int
    p: int
    components: dict  # subset -> array of shape (p,)*(N - |alpha|)

    def __post_init__(self):
        comps = {}
        for alpha in subsets_ascending(self.N):
            shape = cell_shape(self.N, self.p, alpha)
            v = self.components.get(alpha)
            v = np.zeros(shape, dtype=np.complex128) if v is None else np.asarray(v, dtype=np.complex128)
            if v.shape != shape:
                raise DimensionMismatch(f"component {alpha} has shape {v.shape}, expected {shape}")
            comps[alpha] = v
        object.__setattr__(self, "components", comps)

    def __getitem__(self, alpha):
        return self.components[as_subset(alpha, self.N)]

    def dims(self):
        return (self.N, self.M, self.p)

    def norm(self) -> float:
        """Max over components and cells of the absolute value."""
        return max(float(np.max(np.abs(v))) for v in self.components.values())

    def product(self) -> complex:
        """Product of every component over every cell."""
        out = 1.0 + 0.0j
        for v in self.components.values():
            out *= np.prod(v)
        return complex(out)


def c_constant(N: int, M: int, p: int, value: complex) -> CElement:
    return CElement(N, M, p, {a: np.full(cell_shape(N, p, a), value, dtype=np.complex128)
                              for a in subsets_ascending(N)})


def _check_c(f: CElement, g: CElement):
    if f.dims() != g.dims():
        raise DimensionMismatch(f"CElements have dims {f.dims()} and {g.dims()}")


def c_multiply(f: CElement, g: CElement) -> CElement:
    _check_c(f, g)
    return CElement(f.N, f.M, f.p, {a: f.components[a] * g.components[a] for a in f.components})


def c_exp(f: CElement) -> CElement:
    return CElement(f.N, f.M, f.p, {a: np.exp(v) for a, v in f.components.items()})


def c_max_rel_diff(f: CElement, g: CElement) -> float:
    """Largest componentwise ``|f - g| / max(|f|, |g|)`` (0 where both vanish)."""
    _check_c(f, g)
    worst = 0.0
    for a in f.components:
        x, y = f.components[a], g.components[a]
        den = np.maximum(np.abs(x), np.abs(y))
        num = np.abs(x - y)
        rel = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        worst = max(worst, float(np.max(rel)) if rel.size else 0.0)
    return worst


# -- trace --------------------------------------------------------------------

@lru_cache(maxsize=None)
def _trace_subscripts(N, alpha):
    t, x, _, i, _, _ = _letters(N)
    k_sub = "".join(x[d - 1] if d in alpha else t[d - 1] for d in range(1, N + 1))
    k_sub += "".join(x[d - 1] for d in alpha) + i + i
    out = "".join(t[d - 1] for d in complement(alpha, N))
    return f"{k_sub}->{out}"


def trace_term(K: np.ndarray, N: int, p: int, alpha) -> np.ndarray:
    alpha = tuple(alpha)
    return (1.0 / p) ** len(alpha) * np.einsum(_trace_subscripts(N, alpha), K)


def trace(A: MixedOperator) -> CElement:
    comps = {a: trace_term(K, A.N, A.p, a) for a, K in A.terms.items()}
    return CElement(A.N, A.M, A.p, comps)


# -- determinant --------------------------------------------------------------

def det_blocks(K0: np.ndarray, N: int, M: int, p: int) -> np.ndarray:
    return _kernels.batch_det(K0.reshape(-1, M, M)).reshape((p,) * N)


def det_elementary(G: MixedOperator, alpha) -> np.ndarray:
    """Determinant of ``I + <K .>_alpha`` as a function of the complementary cells."""
    alpha = as_subset(alpha, G.N)
    if not alpha:
        return det_blocks(G.term(()), G.N, G.M, G.p)
    return e_field(elementary_kernel(G, alpha), G.N, G.M, G.p, alpha).dets()


def determinant(A: MixedOperator) -> CElement:
    fac = factorize(A)
    comps = {alpha: det_elementary(G, alpha) for alpha, G in fac.factors}
    return CElement(A.N, A.M, A.p, comps)


def det_fredholm(G: MixedOperator, alpha, n_max: int | None = None,
                 max_summands: int = FREDHOLM_MAX_SUMMANDS) -> np.ndarray:
    """Fredholm series of ``I + <K .>_alpha`` at every complementary cell.

    Each (cell, component) pair of the integration variable counts as one
    point, so the n-th term sums n x n determinants ``K[s_a, s_b]_{i_a i_b}``
    over ordered n-tuples of points. The series is exact once ``n_max``
    reaches the rank ``M p^|alpha|`` (its default).
    """
    alpha = as_subset(alpha, G.N)
    K = elementary_kernel(G, alpha)
    N, M, p = G.dims()
    R = M * p ** len(alpha)
    if n_max is None:
        n_max = R
    n_cells = p ** (N - len(alpha))
    summands = n_cells * sum(_kernels.injective_tuples(R, n) for n in range(1, min(n_max, R) + 1))
    if summands > max_summands:
        raise BudgetExceeded(f"Fredholm series needs {summands} summands (cap {max_summands})")
    kmat = kernel_blocks(K, N, M, p, alpha)
    vals = _kernels.fredholm_sum(kmat, n_max, (1.0 / p) ** len(alpha))
    return vals.reshape(cell_shape(N, p, alpha))


def determinant_fredholm(A: MixedOperator, n_max: int | None = None,
                         max_summands: int = FREDHOLM_MAX_SUMMANDS) -> CElement:
    """``determinant`` with every elementary component from its Fredholm series."""
    fac = factorize(A)
    comps = {}
    for alpha, G in fac.factors:
        if alpha:
            comps[alpha] = det_fredholm(G, alpha, n_max, max_summands)
        else:
            comps[alpha] = det_elementary(G, alpha)
    return CElement(A.N, A.M, A.p, comps)


def total_rank(N: int, M: int, p: int) -> int:
    """Sum over subsets of the rank ``M p^|alpha|`` of the corresponding factor."""
    return sum(M * p ** len(a) for a in subsets_ascending(N))


def _ps_matrix_dets(taus, alpha, n):
    """det of the n x n Plemelj-Smithies matrix at every cell."""
    shape = taus[0].components[alpha].shape
    Q = np.zeros(shape + (n, n), dtype=np.complex128)
    for r in range(n):
        for c in range(r + 1):
            Q[..., r, c] = taus[r - c].components[alpha]
        if r + 1 < n:
            Q[..., r, r + 1] = n - r - 1
    return _kernels.batch_det(Q.reshape(-1, n, n)).reshape(shape)


def det_plemelj_smithies(A: MixedOperator, n_max: int | None = None, tol: float = 1e-14) -> CElement:
    """Determinant of ``I + A`` from the traces of the powers of ``A``.

    With ``norm_L(A) < 1`` the series runs until a term's sup norm drops to
    ``tol`` (``n_max`` defaults to 200 as a cap). Otherwise an explicit
    ``n_max`` no larger than :func:`total_rank` is required and exactly that
    many terms are summed; this is exact for elementary operators once
    ``n_max`` reaches their rank.
    """
    N, M, p = A.dims()
    a = norm_L(A)
    if a < 1:
        cap = 200 if n_max is None else n_max
        stop_on_tol = True
    elif n_max is not None and n_max <= total_rank(N, M, p):
        cap = n_max
        stop_on_tol = False
    else:
        raise NotConverged(f"norm_L = {a:.3g} >= 1 and no n_max <= {total_rank(N, M, p)} given")
    comps = {alpha: np.ones(cell_shape(N, p, alpha), dtype=np.complex128) for alpha in subsets_ascending(N)}
    taus = []
    Ak = None
    converged = not stop_on_tol
    for n in range(1, cap + 1):
        Ak = A if Ak is None else compose(Ak, A)
        taus.append(trace(Ak))
        biggest = 0.0
        for alpha in comps:
            term = _ps_matrix_dets(taus, alpha, n) / math.factorial(n)
            comps[alpha] = comps[alpha] + term
            biggest = max(biggest, float(np.max(np.abs(term))))
        if stop_on_tol and biggest <= tol:
            converged = True
            break
    if not converged:
        raise NotConverged(f"Plemelj-Smithies series did not reach tol {tol} in {cap} terms")
    return CElement(N, M, p, comps)


def det_log_series(A: MixedOperator, tol: float = 1e-14) -> CElement:
    """``exp(-sum_n (-1)^n tau(A^n) / n)``, valid for ``norm_L(A) < 1``."""
    N, M, p = A.dims()
    a = norm_L(A)
    if a >= 1:
        raise NormTooLarge(f"log series needs norm_L < 1, got {a:.6g}")
    comps = {alpha: np.zeros(cell_shape(N, p, alpha), dtype=np.complex128) for alpha in subsets_ascending(N)}
    Ak, n = A, 1
    while True:
        tau = trace(Ak)
        for alpha in comps:
            comps[alpha] = comps[alpha] - (-1) ** n * tau.components[alpha] / n
        if a == 0 or M * a ** n / n <= tol:
            break
        n += 1
        Ak = compose(Ak, A)
    return c_exp(CElement(N, M, p, comps))
