import numpy as np
import pytest

from mixedop.algebra import (
    compose,
    exp_operator,
    identity_operator,
    linear_combine,
    zero_operator,
)
from mixedop.errors import BudgetExceeded, DimensionMismatch, NormTooLarge, NotConverged
from mixedop.tracedet import (
    CElement,
    c_constant,
    c_exp,
    c_max_rel_diff,
    c_multiply,
    det_elementary,
    det_fredholm,
    det_log_series,
    det_plemelj_smithies,
    determinant,
    determinant_fredholm,
    total_rank,
    trace,
)
from mixedop.testing import (
    e1_operator,
    random_elementary,
    random_invertible,
    random_operator,
    random_perturbation,
)

from conftest import op1

K12 = [[1, 2], [3, 4]]


def test_trace_e1():
    tau = trace(e1_operator())
    np.testing.assert_allclose(tau[()], [2.0])
    np.testing.assert_allclose(tau[(1,)], 3.0)


def test_trace_identity():
    tau = trace(identity_operator(2, 2, 2))
    np.testing.assert_array_equal(tau[()], np.full((2, 2), 2.0))
    for a in [(1,), (2,), (1, 2)]:
        assert not np.any(tau[a])


def test_trace_diagonal_cells():
    assert trace(op1(2, one=K12))[(1,)] == pytest.approx(2.5)


def test_trace_cyclic(rng):
    A, B = random_operator(rng, 3, 2, 2), random_operator(rng, 3, 2, 2)
    assert c_max_rel_diff(trace(compose(A, B)), trace(compose(B, A))) < 1e-12


def test_det_elementary_examples():
    assert det_elementary(op1(1, empty=[1], one=[[1.5]]), (1,)) == pytest.approx(2.5)
    assert det_elementary(op1(2, empty=[1, 1], one=K12), (1,)) == pytest.approx(3.0)
    np.testing.assert_array_equal(det_elementary(identity_operator(2, 1, 2), (2,)), np.ones(2))


def test_determinant_e1():
    pi = determinant(e1_operator())
    np.testing.assert_allclose(pi[()], [2.0])
    np.testing.assert_allclose(pi[(1,)], 2.5)


def test_determinant_identity():
    pi = determinant(identity_operator(3, 2, 2))
    for v in pi.components.values():
        np.testing.assert_array_equal(v, np.ones_like(v))


@pytest.mark.parametrize("seed", range(5))
def test_multiplicative(seed):
    rng = np.random.default_rng(seed)
    A, B = random_invertible(rng, 2, 2, 2), random_invertible(rng, 2, 2, 2)
    lhs = determinant(compose(A, B))
    rhs = c_multiply(determinant(A), determinant(B))
    assert c_max_rel_diff(lhs, rhs) < 1e-10


def test_fredholm_examples(backend):
    assert det_fredholm(op1(1, empty=[1], one=[[3.0]]), (1,)) == pytest.approx(4.0)
    assert det_fredholm(op1(2, empty=[1, 1], one=K12), (1,)) == pytest.approx(3.0)
    assert det_fredholm(identity_operator(2, 2, 2), (1, 2)) == pytest.approx(1.0)


def test_fredholm_terms_by_order(backend):
    # order 1 adds h * trace, order 2 adds the two off-diagonal 2x2 minors
    G = op1(2, empty=[1, 1], one=K12)
    assert det_fredholm(G, (1,), n_max=1) == pytest.approx(3.5)
    assert det_fredholm(G, (1,), n_max=2) == pytest.approx(3.0)


@pytest.mark.parametrize("N,M,p,alpha", [(1, 2, 2, (1,)), (2, 2, 2, (1, 2)), (3, 2, 2, (2,)),
                                         (3, 1, 2, (1, 2, 3))])
def test_fredholm_matches_e_matrix(backend, N, M, p, alpha):
    G = random_elementary(np.random.default_rng(7), N, M, p, alpha, 0.6)
    np.testing.assert_allclose(det_fredholm(G, alpha), det_elementary(G, alpha), atol=1e-12)


def test_fredholm_budget():
    G = random_elementary(np.random.default_rng(1), 3, 2, 2, (1, 2, 3))
    with pytest.raises(BudgetExceeded):
        det_fredholm(G, (1, 2, 3))
    with pytest.raises(BudgetExceeded):
        det_fredholm(op1(2, empty=[1, 1], one=K12), (1,), max_summands=3)


def test_determinant_fredholm_route(rng):
    A = random_invertible(rng, 2, 2, 2)
    assert c_max_rel_diff(determinant_fredholm(A), determinant(A)) < 1e-12


def test_plemelj_smithies_rank_one():
    A = op1(1, one=[[3.0]])
    pi = det_plemelj_smithies(A, n_max=2)
    assert pi[(1,)] == pytest.approx(4.0)
    assert pi[()] == pytest.approx([1.0])


def test_series_of_zero():
    Z = zero_operator(2, 2, 1)
    for pi in (det_plemelj_smithies(Z), det_log_series(Z)):
        for v in pi.components.values():
            np.testing.assert_array_equal(v, np.ones_like(v))


def test_plemelj_smithies_random():
    rng = np.random.default_rng(3)
    A = random_perturbation(rng, 2, 1, 1, 0.4)
    I = identity_operator(2, 1, 1)
    assert c_max_rel_diff(det_plemelj_smithies(A), determinant(linear_combine(1, I, 1, A))) < 1e-9


def test_plemelj_smithies_guards():
    A = op1(1, one=[[3.0]])
    with pytest.raises(NotConverged):
        det_plemelj_smithies(A)
    with pytest.raises(NotConverged):
        det_plemelj_smithies(A, n_max=total_rank(1, 1, 1) + 1)


def test_total_rank():
    assert total_rank(1, 1, 1) == 2
    assert total_rank(2, 2, 2) == 2 * (1 + 2 + 2 + 4)


def test_log_series_scalar():
    assert det_log_series(op1(1, one=[[0.5]]))[(1,)] == pytest.approx(1.5, rel=1e-14)


def test_log_series_random():
    rng = np.random.default_rng(4)
    A = random_perturbation(rng, 2, 2, 2, 0.5 - 1e-9)
    I = identity_operator(2, 2, 2)
    assert c_max_rel_diff(det_log_series(A), determinant(linear_combine(1, I, 1, A))) < 1e-9


def test_log_series_norm_guard():
    with pytest.raises(NormTooLarge):
        det_log_series(op1(1, one=[[1.0]]))


def test_c_algebra():
    rng = np.random.default_rng(5)
    f = trace(random_operator(rng, 2, 1, 2))
    one = c_constant(2, 1, 2, 1.0)
    assert c_max_rel_diff(c_multiply(one, f), f) == 0.0
    zero = CElement(2, 1, 2, {})
    assert c_max_rel_diff(c_exp(zero), one) == 0.0


def test_exp_identity():
    rng = np.random.default_rng(6)
    A = random_perturbation(rng, 2, 2, 2, 1.0)
    assert c_max_rel_diff(determinant(exp_operator(A)), c_exp(trace(A))) < 1e-9


def test_celement_rejects_bad_shape():
    with pytest.raises(DimensionMismatch):
        CElement(1, 1, 2, {(): np.ones(3)})
