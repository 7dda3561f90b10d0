import logging

import numpy as np
import pytest

from conftest import random_connected_graph
from fasttsnet import optimizer as opt
from fasttsnet.fixtures import barabasi_albert, cycle, grid, path
from fasttsnet.gradients import GradientBuffers, cost
from fasttsnet.pivot_mds import PivotConfig, pivot_mds


def _tree(n, seed):
    rng = np.random.default_rng(seed)
    return random_connected_graph(rng, n, 0)


def test_zero_iterations_returns_pivot_mds():
    g = path(5)
    cfg = opt.LayoutConfig(iterations=0)
    X = pivot_mds(g, PivotConfig(cfg.pivot_count, cfg.seed))
    got = opt.run(g, cfg).positions
    assert np.allclose(got, X - X.mean(axis=0), atol=1e-15)
    assert np.allclose(X.mean(axis=0), 0, atol=1e-12)


def test_cost_decreases_on_random_tree():
    g = _tree(30, 3)
    cfg = opt.LayoutConfig(preset="exact")
    start = opt.run(g, opt.LayoutConfig(iterations=0))
    final = opt.run(g, cfg, affinities=start.affinities)
    for it in (0, cfg.iterations - 1):
        mult = cfg.multipliers(it)
        assert cost(start.affinities, final.positions, mult) < cost(start.affinities, start.positions, mult)


@pytest.mark.parametrize("preset", ["exact", "bh", "fit", "linear"])
def test_same_seed_bit_identical(preset):
    g = grid(8, 8)
    cfg = opt.LayoutConfig(preset=preset, iterations=60, seed=4)
    assert np.array_equal(opt.run(g, cfg).positions, opt.run(g, cfg).positions)


def test_step_examples():
    X = np.random.default_rng(0).normal(size=(5, 2))
    v = np.random.default_rng(1).normal(size=(5, 2))
    g = np.random.default_rng(2).normal(size=(5, 2))
    s = opt.State(X, np.zeros_like(X), 0, 50.0)
    assert np.array_equal(opt.step(s, np.zeros_like(X), 0.8).positions, X)
    assert np.array_equal(opt.step(s, g, 0.0).positions - X, -50.0 * g)
    moved = opt.step(opt.State(X, v, 3, 50.0), np.zeros_like(X), 0.5)
    assert np.allclose(moved.positions - X, 0.5 * v)
    assert moved.iteration == 4


def test_schedule_lookup():
    cfg = opt.LayoutConfig()
    assert cfg.momentum_at(0) == 0.5 and cfg.momentum_at(249) == 0.5 and cfg.momentum_at(250) == 0.8
    a, b = cfg.multipliers(249), cfg.multipliers(250)
    assert (a.lambda_c, a.lambda_r) == (1.2, 0.0)
    assert (b.lambda_c, b.lambda_r) == (0.01, 0.6)


def test_trace_and_callback():
    seen = []
    res = opt.run(cycle(20), opt.LayoutConfig(iterations=300), callback=lambda *a: seen.append(a))
    assert len(res.trace) == len(seen) == 300
    assert [t.stage for t in res.trace[248:252]] == [0, 0, 1, 1]
    assert all(np.isfinite(t.grad_inf_norm) and t.millis >= 0 for t in res.trace)
    assert np.allclose(res.positions.mean(axis=0), 0, atol=1e-9)


def test_invalid_config():
    with pytest.raises(ValueError):
        opt.LayoutConfig(preset="fast")
    with pytest.raises(ValueError):
        opt.LayoutConfig(iterations=-1)
    with pytest.raises(ValueError):
        opt.LayoutConfig(stages=(opt.Stage(10, 1, 1, 1),))
    with pytest.raises(ValueError):
        opt.run(grid(2, 2).__class__.from_edges(4, [(0, 1), (2, 3)]))


def _fake_gradient(values):
    calls = iter(values)

    def fake(aff, X, mult, preset, theta, pairs):
        z = np.zeros_like(X)
        # alternating signs keep the layout mean at zero
        sign = np.where(np.arange(len(X)) % 2 == 0, 1.0, -1.0)[:, None]
        total = sign * np.full_like(X, next(calls, 0.0))
        return GradientBuffers(z, z, 1.0, z, z, total)

    return fake


def test_overflowing_step_halves_learning_rate(monkeypatch, caplog):
    # 50 * 1e307 overflows, 12.5 * 1e307 does not: two halvings
    monkeypatch.setattr(opt, "total_gradient", _fake_gradient([1e307]))
    with caplog.at_level(logging.WARNING, logger="fasttsnet.optimizer"):
        res = opt.run(path(4), opt.LayoutConfig(iterations=1, stable_step=False))
    assert np.isfinite(res.positions).all()
    assert sum("learning rate" in r.message for r in caplog.records) == 2


def test_persistent_overflow_aborts(monkeypatch):
    monkeypatch.setattr(opt, "total_gradient", _fake_gradient([np.inf]))
    with pytest.raises(opt.NumericalError, match="iteration 0"):
        opt.run(path(4), opt.LayoutConfig(iterations=2))


@pytest.mark.parametrize("make", [lambda: grid(12, 12), lambda: cycle(150),
                                  lambda: barabasi_albert(200, 2, 1)])
def test_presets_reach_similar_cost(make):
    g = make()
    base = opt.run(g, opt.LayoutConfig(preset="exact"))
    mult = opt.LayoutConfig().multipliers(499)
    ref = cost(base.affinities, base.positions, mult)
    for preset in ("bh", "fit", "linear"):
        X = opt.run(g, opt.LayoutConfig(preset=preset), affinities=base.affinities).positions
        assert abs(cost(base.affinities, X, mult) - ref) <= 0.05 * abs(ref)


def test_small_graphs_stay_bounded():
    # without the cap, compression alone multiplies P5 coordinates by -11 per step
    for g in (path(5), grid(3, 3)):
        X = opt.run(g, opt.LayoutConfig(preset="exact")).positions
        assert np.ptp(X) < 100


def test_step_cap_from_curvature_bound():
    small = opt.run(path(5), opt.LayoutConfig(iterations=0))
    cfg = opt.LayoutConfig()
    # P5 rows sum to 1/5; L = 8/5 + 1.2/5 and mu = 0.5
    assert opt.stable_learning_rate(small.affinities, cfg) == pytest.approx(3 / (1.6 + 0.24))
    big = opt.run(grid(32, 32), opt.LayoutConfig(iterations=0))
    assert opt.stable_learning_rate(big.affinities, cfg) > cfg.learning_rate
