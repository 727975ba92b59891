"""Numba vs pure-numpy timings for the hot kernels and two end-to-end calls.

    python benchmarks/bench_kernels.py [--repeat 5]

The same inputs go through both backends; outputs are compared before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mixedop import _kernels
from mixedop.factorization import kernel_blocks
from mixedop.testing import random_elementary, random_invertible
from mixedop.tracedet import det_fredholm, determinant


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    batch = rng.standard_normal((4096, 8, 8)) + 1j * rng.standard_normal((4096, 8, 8))
    small = rng.standard_normal((65536, 2, 2)) + 0j
    G = random_elementary(rng, 2, 2, 2, (1, 2), 0.5)
    kmat = kernel_blocks(G.term((1, 2)), 2, 2, 2, (1, 2))
    A = random_invertible(rng, 3, 2, 2)
    return [
        ("batch det 4096 x (8x8)", lambda: _kernels.batch_det(batch)),
        ("batch det 65536 x (2x2)", lambda: _kernels.batch_det(small)),
        ("batch inverse 4096 x (8x8)", lambda: _kernels.lu_inverse(*_kernels.lu_factor(batch)[:2])),
        ("Fredholm sum, rank 8", lambda: _kernels.fredholm_sum(kmat, 8, 0.25)),
        ("det_fredholm N=2 M=2 p=2", lambda: det_fredholm(G, (1, 2))),
        ("determinant N=3 M=2 p=2", lambda: determinant(A)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    prev = _kernels.backend()
    rows = []
    try:
        for name, fn in cases(rng):
            out, t = {}, {}
            for be in ("numba", "numpy"):
                _kernels.set_backend(be)
                out[be] = fn()  # also triggers compilation
                t[be] = _best(fn, args.repeat)
            a, b = out["numba"], out["numpy"]
            a = a.components if hasattr(a, "components") else {0: a}
            b = b.components if hasattr(b, "components") else {0: b}
            diff = max(float(np.max(np.abs(np.asarray(a[k]) - np.asarray(b[k])))) for k in a)
            rows.append((name, t["numba"], t["numpy"], diff))
    finally:
        _kernels.set_backend(prev)

    print(f"{'case':<30} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8} {'max diff':>10}")
    for name, tn, tp, diff in rows:
        print(f"{name:<30} {1e3 * tn:>11.2f} {1e3 * tp:>11.2f} {tp / tn:>7.1f}x {diff:>10.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
