import os
import subprocess
import sys

import numpy as np
import pytest

from mixedop import _kernels


def _batch(rng, B, n):
    return rng.standard_normal((B, n, n)) + 1j * rng.standard_normal((B, n, n))


@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_lu_det_matches_lapack(backend, rng, n):
    a = _batch(rng, 7, n)
    np.testing.assert_allclose(_kernels.batch_det(a), np.linalg.det(a), rtol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_lu_inverse(backend, rng, n):
    a = _batch(rng, 4, n)
    lu, piv, sing = _kernels.lu_factor(a)
    assert not sing.any()
    np.testing.assert_allclose(_kernels.lu_inverse(lu, piv) @ a, np.broadcast_to(np.eye(n), a.shape),
                               atol=1e-12)


def test_empty_matrices(backend):
    lu, piv, sing = _kernels.lu_factor(np.zeros((3, 0, 0)))
    assert piv.shape == (3, 0) and not sing.any()


def test_singularity_flags(backend):
    cancel = [[1, 1, 0], [1, 1 + 1e-14, 1], [0, 0, 1]]  # pivot 1e-14 next to an entry of size 1
    a = np.array([np.eye(3), cancel, np.zeros((3, 3)), [[1, 2, 3], [2, 4, 6], [0, 0, 1]]])
    _, _, sing = _kernels.lu_factor(a)
    assert sing.tolist() == [False, True, True, True]


def test_small_diagonal_is_not_singular(backend):
    # the test is relative to the pivot's own row, so row scaling does not trigger it
    _, _, sing = _kernels.lu_factor(np.diag([1.0, 1e-13, 1.0])[None])
    assert not sing.any()


def test_singularity_is_scale_aware(backend):
    # a well-conditioned matrix with tiny entries is not singular
    _, _, sing = _kernels.lu_factor(1e-200 * np.eye(2)[None])
    assert not sing.any()


def test_backends_agree(rng):
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    a = _batch(rng, 5, 4)
    kmat = 0.3 * _batch(rng, 3, 5)
    out = {}
    prev = _kernels.backend()
    try:
        for name in ("numpy", "numba"):
            _kernels.set_backend(name)
            lu, piv, _ = _kernels.lu_factor(a)
            out[name] = (_kernels.lu_det(lu, piv), _kernels.lu_inverse(lu, piv),
                         _kernels.fredholm_sum(kmat, 5, 0.5))
    finally:
        _kernels.set_backend(prev)
    for x, y in zip(out["numpy"], out["numba"]):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("R", [1, 3, 5])
def test_fredholm_sum_is_determinant(backend, rng, R):
    kmat = 0.4 * _batch(rng, 2, R)
    hk = 0.5
    want = np.linalg.det(np.eye(R) + hk * kmat)
    np.testing.assert_allclose(_kernels.fredholm_sum(kmat, R, hk), want, rtol=1e-12)


def test_fredholm_truncation(backend, rng):
    kmat = _batch(rng, 1, 4)
    # order one keeps only hk * trace
    np.testing.assert_allclose(_kernels.fredholm_sum(kmat, 1, 0.25), 1 + 0.25 * np.trace(kmat[0]))


def test_injective_tuple_count():
    assert _kernels.injective_tuples(8, 8) == 40320
    assert _kernels.injective_tuples(3, 4) == 0


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", None)])
def test_env_flag(flag, expected):
    env = dict(os.environ, MIXEDOP_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from mixedop import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    if expected is None:
        expected = "numba" if _kernels.HAVE_NUMBA else "numpy"
    assert out == expected
