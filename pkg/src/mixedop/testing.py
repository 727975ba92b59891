"""Random instance generators for tests, the self-test suites and benchmarks."""
from __future__ import annotations

import numpy as np

from .algebra import MixedOperator, identity_operator, linear_combine, norm_L, scale
from .factorization import blocks_to_kernel, kernel_blocks
from .staircase import StaircaseFunction, function_shape, kernel_shape, subsets_ascending

# (N, M, p) with N <= 3, M <= 2, p <= 2: the sizes the oracle-backed suites cycle through
DESK_SIZES = [(N, M, p) for N in (1, 2, 3) for M in (1, 2) for p in (1, 2)]


def random_complex(rng, shape, scale_=1.0):
    return scale_ * (rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape))


def random_operator(rng, N, M, p, scale_=1.0, subsets=None) -> MixedOperator:
    subsets = subsets_ascending(N) if subsets is None else subsets
    return MixedOperator(N, M, p, {a: random_complex(rng, kernel_shape(N, M, p, a), scale_)
                                   for a in subsets})


def with_norm(A: MixedOperator, target: float) -> MixedOperator:
    return scale(target / norm_L(A), A)


def random_perturbation(rng, N, M, p, target_norm) -> MixedOperator:
    return with_norm(random_operator(rng, N, M, p), target_norm)


def random_invertible(rng, N, M, p, spread=0.6) -> MixedOperator:
    """Diagonally dominant multiplication part plus integral terms of total norm ``spread``.

    The empty-subset blocks are ``2 I + E`` with ``|E|`` at most 0.5 per entry,
    so every factor produced by the peel-off stays well conditioned.
    """
    base = linear_combine(2.0, identity_operator(N, M, p), 1.0,
                          random_operator(rng, N, M, p, 0.5 / max(M, 1), subsets=[()]))
    rest = random_operator(rng, N, M, p, subsets=subsets_ascending(N)[1:])
    return linear_combine(1.0, base, 1.0, with_norm(rest, spread))


def random_elementary(rng, N, M, p, alpha, scale_=0.5) -> MixedOperator:
    eye = identity_operator(N, M, p)
    K = random_complex(rng, kernel_shape(N, M, p, alpha), scale_)
    return MixedOperator(N, M, p, {(): eye.term(()), tuple(alpha): K})


def random_function(rng, N, M, p) -> StaircaseFunction:
    return StaircaseFunction(N, M, p, random_complex(rng, function_shape(N, M, p)))


def random_symmetric(rng, N, M, p, scale_=1.0) -> MixedOperator:
    """Real kernels whose staircase matrix is symmetric, so its spectrum is real."""
    terms = {}
    for a in subsets_ascending(N):
        K = scale_ * rng.uniform(-1, 1, kernel_shape(N, M, p, a))
        mats = kernel_blocks(K, N, M, p, a)
        mats = 0.5 * (mats + np.swapaxes(mats, 1, 2))
        terms[a] = blocks_to_kernel(mats, N, M, p, a)
    return MixedOperator(N, M, p, terms)


def e1_operator() -> MixedOperator:
    """``2 + <3 .>`` on the unit interval, the smallest example with both term types."""
    return MixedOperator(1, 1, 1, {(): [[[2.0]]], (1,): [[[[3.0]]]]})
