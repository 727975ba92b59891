"""The benchmark script runs and both backends agree on every case."""
import importlib.util
from pathlib import Path

import pytest

from mixedop import _kernels

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_benchmark_smoke(capsys):
    modspec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    bench = importlib.util.module_from_spec(modspec)
    modspec.loader.exec_module(bench)
    assert bench.main(["--repeat", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 7
    for line in lines[1:]:
        assert float(line.split()[-1]) < 1e-9
