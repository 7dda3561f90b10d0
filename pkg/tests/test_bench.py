import io
import math

import numpy as np
import pytest

from fasttsnet import bench
from fasttsnet.fixtures import grid
from fasttsnet.optimizer import LayoutConfig


def test_fit_slope_recovers_power_law():
    ns = np.array([100, 400, 1600, 6400])
    assert bench.fit_slope(ns, 3.0 * ns**1.5) == pytest.approx(1.5)
    assert math.isnan(bench.fit_slope([10, 10], [1.0, 2.0]))


def test_grid_sources_sizes():
    names = [name for name, _ in bench.grid_sources([1024, 4096])]
    assert names == ["grid32x32", "grid64x64"]
    assert bench.grid_sources([1024])[0][1]().n == 1024


def test_bench_graph_row():
    row = bench.bench_graph("g", grid(5, 5), "bh", base=LayoutConfig(iterations=10), repeats=2)
    assert (row.n, row.m, row.algo) == (25, 40, "bh")
    assert row.setup_ms > 0 and row.per_iter_ms > 0 and row.total_ms >= row.setup_ms
    assert 0 <= row.np <= 1 and 0 <= row.sb <= 1 and 0 <= row.crosslessness <= 1


def test_sweep_skips_failures_and_writes_csv():
    def broken():
        raise ValueError("nope")

    sources = [("ok", lambda: grid(4, 4)), ("bad", broken)]
    rows, failed = bench.run_sweep(sources, ["linear", "fit"], [0, 1], LayoutConfig(iterations=5),
                                   metrics=False)
    assert failed == ["bad"] and len(rows) == 4
    buf = io.StringIO()
    bench.write_csv(buf, rows)
    assert buf.getvalue().splitlines()[0] == ",".join(bench.COLUMNS)
    assert set(bench.slopes_by_algo(rows)) == {"linear", "fit"}


def test_scaling_sweep_callable_repeats():
    seen = []
    rows = bench.scaling_sweep([16, 64], ["linear"], iterations=4,
                               repeats=lambda n: seen.append(n) or 1)
    assert seen == [16, 64] and [r.n for r in rows] == [16, 64]
