import numpy as np
import pytest

from mixedop.algebra import (
    MixedOperator,
    apply,
    compose,
    exp_operator,
    identity_operator,
    linear_combine,
    multiplication_operator,
    norm_L,
    operator_equal,
    power,
    refine_operator,
    scale,
    to_common_resolution,
    zero_operator,
)
from mixedop.errors import DimensionMismatch, MalformedInput
from mixedop.staircase import StaircaseFunction, refine_function
from mixedop.testing import e1_operator, random_function, random_operator

from conftest import op1

K12 = [[1, 2], [3, 4]]


def test_identity_basics(rng):
    I1 = identity_operator(1, 1, 1)
    assert list(I1.terms) == [()]
    assert I1.term(()).reshape(-1)[0] == 1
    assert norm_L(identity_operator(2, 2, 2)) == 1.0
    u = random_function(rng, 2, 2, 2)
    np.testing.assert_array_equal(apply(identity_operator(2, 2, 2), u).values, u.values)


def test_apply_e1():
    v = apply(e1_operator(), StaircaseFunction(1, 1, 1, np.ones((1, 1))))
    assert v.values[0, 0] == 5


def test_apply_integral_term():
    A = op1(2, one=K12)
    v = apply(A, StaircaseFunction(1, 1, 2, np.array([[1.0], [0.0]])))
    np.testing.assert_allclose(v.values[:, 0], [0.5, 1.5])


def test_apply_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        apply(identity_operator(1, 1, 2), random_function(rng, 1, 1, 1))


def test_linear_combine_cancels(rng):
    A = random_operator(rng, 2, 2, 2)
    Z = linear_combine(1, A, -1, A)
    assert Z.terms == {}
    assert norm_L(Z) == 0.0


def test_linear_combine_scaled_identity(rng):
    B = random_operator(rng, 1, 2, 2)
    C = linear_combine(2, identity_operator(1, 2, 2), 0, B)
    assert list(C.terms) == [()]
    np.testing.assert_array_equal(C.term(()), 2 * identity_operator(1, 2, 2).term(()))


def test_compose_disjoint_constant():
    a = MixedOperator(2, 1, 1, {(1,): np.ones((1, 1, 1, 1, 1))})
    b = MixedOperator(2, 1, 1, {(2,): np.ones((1, 1, 1, 1, 1))})
    C = compose(a, b)
    assert list(C.terms) == [(1, 2)]
    np.testing.assert_array_equal(C.term((1, 2)), np.ones((1, 1, 1, 1, 1, 1)))


def test_compose_same_subset():
    C = compose(op1(2, one=K12), op1(2, one=[[5, 6], [7, 8]]))
    np.testing.assert_allclose(C.term((1,))[..., 0, 0], [[9.5, 11], [21.5, 25]])


def test_compose_identity_neutral(rng):
    A = random_operator(rng, 3, 2, 2)
    I = identity_operator(3, 2, 2)
    assert operator_equal(compose(I, A), A, 1e-15)
    assert operator_equal(compose(A, I), A, 1e-15)


def test_compose_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        compose(random_operator(rng, 1, 1, 2), random_operator(rng, 1, 1, 1))


def test_norm_examples():
    assert norm_L(e1_operator()) == 5.0
    A = multiplication_operator(1, 2, 1, np.array([[[1, -2], [0, 3]]]))
    assert norm_L(A) == 3.0


def test_operator_equal():
    A = e1_operator()
    assert operator_equal(A, A, 0.0)
    B = MixedOperator(1, 1, 1, {(): [[[2.0]]], (1,): [[[[3.0 + 1e-6]]]]})
    assert not operator_equal(A, B, 1e-9)


def test_exp_diagonal_multiplication():
    a = np.array([[[0.3, 0], [0, -0.7]], [[1.1, 0], [0, 0.2]]])
    E = exp_operator(multiplication_operator(1, 2, 2, a))
    want = np.zeros_like(a)
    for t in range(2):
        want[t] = np.diag(np.exp(np.diag(a[t])))
    np.testing.assert_allclose(E.term(()), want, rtol=1e-14)


def test_exp_rank_one():
    E = exp_operator(op1(1, one=[[3.0]]))
    np.testing.assert_allclose(E.term(()).reshape(-1), [1.0])
    np.testing.assert_allclose(E.term((1,)).reshape(-1), [np.e ** 3 - 1], rtol=1e-14)


def test_exp_zero_is_identity():
    assert operator_equal(exp_operator(zero_operator(2, 2, 1)), identity_operator(2, 2, 1), 0.0)


def test_power_matches_repeated_compose(rng):
    A = random_operator(rng, 2, 1, 2, 0.3)
    assert operator_equal(power(A, 3), compose(A, compose(A, A)), 1e-14)
    assert operator_equal(power(A, 0), identity_operator(2, 1, 2), 0.0)


def test_refine_constant_kernel():
    B = refine_operator(op1(1, one=[[3.0]]), 2)
    assert B.p == 2
    np.testing.assert_array_equal(B.term((1,))[..., 0, 0], np.full((2, 2), 3.0))


def test_refine_by_one_is_identity(rng):
    A = random_operator(rng, 2, 2, 2)
    assert operator_equal(refine_operator(A, 1), A, 0.0)


def test_refine_commutes_with_apply(rng):
    A = random_operator(rng, 2, 2, 2)
    u = random_function(rng, 2, 2, 2)
    lhs = apply(refine_operator(A, 2), refine_function(u, 2))
    rhs = refine_function(apply(A, u), 2)
    np.testing.assert_allclose(lhs.values, rhs.values, atol=1e-13)


def test_common_resolution(rng):
    A, B = to_common_resolution(random_operator(rng, 1, 1, 2), random_operator(rng, 1, 1, 3))
    assert A.p == B.p == 6


def test_constructor_validation():
    with pytest.raises(DimensionMismatch):
        MixedOperator(1, 1, 2, {(1,): np.zeros((2, 2, 1))})
    with pytest.raises(MalformedInput):
        MixedOperator(1, 1, 1, {(): np.array([[[np.inf]]])})
    with pytest.raises(MalformedInput):
        MixedOperator(0, 1, 1, {})


def test_scale_and_operators(rng):
    A = random_operator(rng, 2, 1, 2)
    assert operator_equal(scale(2.0, A), A + A, 1e-15)
    assert operator_equal(A - A, zero_operator(2, 1, 2), 0.0)
    assert operator_equal(-A, scale(-1, A), 0.0)
    assert operator_equal(A @ A, compose(A, A), 0.0)
