"""Cell geometry of the unit cube at resolution h = 1/p.

Dimensions are numbered 1..N. A subset of dimensions is a sorted tuple of
ints. Cell ``t`` along a dimension is the half-open interval [t/p, (t+1)/p).

Array layout used throughout the package:

* a staircase function on [0,1)^N with values in C^M is an array of shape
  ``(p,)*N + (M,)``;
* the kernel of the term over subset ``alpha`` is an array of shape
  ``(p,)*N + (p,)*len(alpha) + (M, M)``: the full k-cell first, then the
  x-cell over ``alpha``, then row and column.

Both are flattened row-major (dimension 1 most significant).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import DimensionMismatch, MalformedInput, NotASubset, OverlappingSubsets

Subset = tuple  # sorted tuple of 1-based dimension indices


def as_subset(dims: Iterable[int], N: int | None = None) -> Subset:
    """Normalize ``dims`` to a sorted tuple; reject duplicates and out-of-range entries."""
    out = tuple(sorted(int(d) for d in dims))
    if len(set(out)) != len(out):
        raise MalformedInput(f"duplicate dimension in subset {list(dims)}")
    if out and (out[0] < 1 or (N is not None and out[-1] > N)):
        raise MalformedInput(f"subset {list(out)} out of range 1..{N}")
    return out


def complement(alpha: Subset, N: int) -> Subset:
    return tuple(d for d in range(1, N + 1) if d not in alpha)


def subsets_ascending(N: int) -> list[Subset]:
    """All 2^N subsets of {1..N}, by size, ties broken lexicographically."""
    if N < 1:
        raise ValueError("N must be >= 1")
    dims = range(1, N + 1)
    return [c for k in range(N + 1) for c in combinations(dims, k)]


@dataclass(frozen=True)
class CellIndex:
    subset: Subset
    coords: tuple

    def __post_init__(self):
        if len(self.subset) != len(self.coords):
            raise MalformedInput("coords length must equal subset size")
        if list(self.subset) != sorted(set(self.subset)):
            raise MalformedInput("subset must be strictly increasing")


def diamond_merge(x: CellIndex, y: CellIndex) -> CellIndex:
    """Assemble the cell over the union of two disjoint subsets."""
    if set(x.subset) & set(y.subset):
        raise OverlappingSubsets(f"subsets {x.subset} and {y.subset} overlap")
    pairs = sorted(zip(x.subset + y.subset, x.coords + y.coords))
    return CellIndex(tuple(d for d, _ in pairs), tuple(c for _, c in pairs))


def restrict(t: CellIndex, beta: Subset) -> CellIndex:
    """Coordinates of ``t`` on the dimensions in ``beta``."""
    beta = tuple(beta)
    pos = {d: i for i, d in enumerate(t.subset)}
    missing = [d for d in beta if d not in pos]
    if missing:
        raise NotASubset(f"{beta} is not a subset of {t.subset}")
    return CellIndex(beta, tuple(t.coords[pos[d]] for d in beta))


# -- array-level helpers -----------------------------------------------------

def kernel_shape(N: int, M: int, p: int, alpha: Subset) -> tuple:
    return (p,) * N + (p,) * len(alpha) + (M, M)


def function_shape(N: int, M: int, p: int) -> tuple:
    return (p,) * N + (M,)


def cell_shape(N: int, p: int, alpha: Subset) -> tuple:
    """Shape of a scalar staircase function of the complementary variables."""
    return (p,) * (N - len(alpha))


def refine_array(a: np.ndarray, q: int, n_axes: int) -> np.ndarray:
    """Replicate each entry ``q`` times along each of the first ``n_axes`` axes."""
    for ax in range(n_axes):
        a = np.repeat(a, q, axis=ax)
    return a


@dataclass(frozen=True)
class StaircaseFunction:
    N: int
    M: int
    p: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != function_shape(self.N, self.M, self.p):
            raise DimensionMismatch(
                f"function values have shape {v.shape}, "
                f"expected {function_shape(self.N, self.M, self.p)}")
        if not np.all(np.isfinite(v)):
            raise MalformedInput("function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return 1.0 / self.p

    def vec(self) -> np.ndarray:
        return self.values.reshape(-1)


def refine_function(u: StaircaseFunction, q: int) -> StaircaseFunction:
    if q < 1:
        raise ValueError("refinement factor must be >= 1")
    return StaircaseFunction(u.N, u.M, u.p * q, refine_array(u.values, q, u.N))
