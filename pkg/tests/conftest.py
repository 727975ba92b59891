import numpy as np
import pytest

from mixedop import _kernels
from mixedop.algebra import MixedOperator

BACKENDS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    prev = _kernels.backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def op1(p, **terms):
    """N=1, M=1 operator from scalar-entry arrays: op1(2, empty=[..], one=[[..]])."""
    out = {}
    if "empty" in terms:
        out[()] = np.asarray(terms["empty"], dtype=complex).reshape((p, 1, 1))
    if "one" in terms:
        out[(1,)] = np.asarray(terms["one"], dtype=complex).reshape((p, p, 1, 1))
    return MixedOperator(1, 1, p, out)
