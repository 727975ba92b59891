import numpy as np
import pytest

from mixedop.algebra import MixedOperator, compose, identity_operator, norm_L, operator_equal
from mixedop.errors import MalformedInput, SingularBlock, SingularE
from mixedop.factorization import (
    build_E,
    elementary_inverse,
    factorize,
    inverse,
    separate_variables,
)
from mixedop.staircase import kernel_shape
from mixedop.testing import e1_operator, random_complex, random_elementary, random_invertible

from conftest import op1


def test_separation_rank_one():
    sep = separate_variables(np.full((1, 1, 1, 1), 7.0), (1,))
    assert sep.rank == 1
    np.testing.assert_array_equal(sep.reconstruct(), np.full((1, 1, 1, 1), 7.0))


def test_separation_reconstructs(rng):
    K = random_complex(rng, kernel_shape(2, 2, 2, (2,)))
    sep = separate_variables(K, (2,))
    assert sep.rank == 4
    np.testing.assert_array_equal(sep.reconstruct(), K)


def test_e_matrix_2x2():
    G = op1(2, empty=[1, 1], one=[[1, 2], [3, 4]])
    E = build_E(G, (1,))
    np.testing.assert_allclose(E.at(()), [[1.5, 1.0], [1.5, 3.0]])


def test_e_matrix_scalar():
    E = build_E(op1(1, empty=[1], one=[[1.5]]), (1,))
    np.testing.assert_allclose(E.at(()), [[2.5]])


def test_e_matrix_zero_kernel(rng):
    E = build_E(identity_operator(2, 2, 2), (1, 2))
    np.testing.assert_array_equal(E.matrices, np.broadcast_to(np.eye(8), E.matrices.shape))


def test_e_field_one_matrix_per_complementary_cell():
    G = random_elementary(np.random.default_rng(0), 2, 1, 1, (2,))
    E = build_E(G, (2,))
    assert E.cell_shape == (1,)
    assert E.matrices.shape == (1, 1, 1)


def test_elementary_inverse_rank_one():
    H = elementary_inverse(op1(1, empty=[1], one=[[1.5]]), (1,))
    np.testing.assert_allclose(H.term((1,)).reshape(-1), [-0.6])
    np.testing.assert_allclose(H.term(()).reshape(-1), [1.0])


def test_elementary_inverse_identity():
    I = identity_operator(2, 1, 2)
    assert operator_equal(elementary_inverse(I, (1,)), I, 0.0)


def test_elementary_inverse_singular():
    with pytest.raises(SingularE) as exc:
        elementary_inverse(op1(1, empty=[1], one=[[-1.0]]), (1,))
    assert exc.value.alpha == (1,)


def test_elementary_form_enforced(rng):
    with pytest.raises(MalformedInput):
        build_E(e1_operator(), (1,))


@pytest.mark.parametrize("N,M,p", [(1, 2, 2), (2, 1, 2), (2, 2, 2), (3, 1, 2)])
def test_elementary_inverse_products(rng, N, M, p):
    for alpha in [(1,), (N,), tuple(range(1, N + 1))]:
        G = random_elementary(rng, N, M, p, alpha, 0.3)
        H = elementary_inverse(G, alpha)
        I = identity_operator(N, M, p)
        assert operator_equal(compose(G, H), I, 1e-13)
        assert operator_equal(compose(H, G), I, 1e-13)


def test_factorize_e1():
    fac = factorize(e1_operator())
    np.testing.assert_allclose(fac.factor(()).term(()).reshape(-1), [2.0])
    np.testing.assert_allclose(fac.factor((1,)).term((1,)).reshape(-1), [1.5])
    assert operator_equal(fac.recompose(), e1_operator(), 1e-15)


def test_factorize_identity():
    fac = factorize(identity_operator(2, 2, 1))
    for _, G in fac.factors:
        assert operator_equal(G, identity_operator(2, 2, 1), 0.0)


def test_factorize_zero_block():
    A = op1(1, one=[[3.0]])
    with pytest.raises(SingularBlock) as exc:
        factorize(A)
    assert exc.value.alpha == ()
    assert exc.value.cell == (0,)


def test_factor_order_ascending(rng):
    fac = factorize(random_invertible(rng, 3, 1, 2))
    assert [a for a, _ in fac.factors] == [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]


def test_inverse_e1():
    Ainv = inverse(e1_operator())
    np.testing.assert_allclose(Ainv.term(()).reshape(-1), [0.5])
    np.testing.assert_allclose(Ainv.term((1,)).reshape(-1), [-0.3])


def test_inverse_identity():
    I = identity_operator(3, 2, 2)
    assert operator_equal(inverse(I), I, 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_double_inverse(seed):
    rng = np.random.default_rng(seed)
    A = random_invertible(rng, 2, 2, 2)
    assert norm_L(inverse(inverse(A)) - A) <= 1e-9 * (1 + norm_L(A))


def test_singular_e_reports_cell_and_partial():
    # at k_2 = 1 the {1}-kernel is constant -1, so E = I + 0.5 * (-1) * ones(2, 2) has det 0
    K = np.zeros((2, 2, 2, 1, 1))
    K[:, 1, :, 0, 0] = -1.0
    eye = np.broadcast_to(np.eye(1), (2, 2, 1, 1)).copy()
    A = MixedOperator(2, 1, 2, {(): eye, (1,): K})
    with pytest.raises(SingularE) as exc:
        factorize(A)
    assert exc.value.alpha == (1,)
    assert exc.value.cell == (1,)
    assert () in exc.value.partial and (1,) in exc.value.partial
    assert "cell [1]" in str(exc.value)
