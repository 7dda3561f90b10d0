import numba
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fasttsnet import quadtree as qt


def _exact(X, kernel, n_out, params=np.zeros(1)):
    out = np.zeros((len(X), n_out))
    for i in range(len(X)):
        for j in range(len(X)):
            if i != j:
                dx, dy = X[i] - X[j]
                kernel.py_func(dx, dy, dx * dx + dy * dy, 1.0, params, out[i])
    return out


def test_single_point():
    t = qt.build([[3.0, 4.0]])
    assert t.n_nodes == 1 and t.is_leaf(0)
    assert t.count[0] == 1 and t.com[0].tolist() == [3.0, 4.0]


def test_unit_square_corners():
    t = qt.build([[0, 0], [1, 0], [0, 1], [1, 1]])
    assert t.count[0] == 4
    assert np.allclose(t.com[0], [0.5, 0.5])
    kids = t.children(0)
    assert [t.count[c] for c in kids] == [1, 1, 1, 1]
    assert all(t.is_leaf(c) for c in kids)


def test_coincident_points_share_a_leaf():
    t = qt.build([[1.0, 1.0], [1.0, 1.0]])
    assert t.n_nodes == 1 and t.count[0] == 2


def test_non_finite_input_names_vertex():
    with pytest.raises(ValueError, match="vertex 1"):
        qt.build([[0.0, 0.0], [np.nan, 1.0]])


points = arrays(np.float64, st.tuples(st.integers(1, 60), st.just(2)),
                elements=st.floats(-50, 50, allow_nan=False).map(lambda v: round(v, 1)))


@given(points)
def test_structure_invariants(X):
    t = qt.build(X)
    assert sorted(t.order.tolist()) == list(range(len(X)))
    assert np.array_equal(t.order[t.position], np.arange(len(X)))
    for node in range(t.n_nodes):
        m = t.members(node)
        assert t.count[node] == len(m)
        if len(m):
            assert np.allclose(t.com[node], X[m].mean(axis=0))
            half = t.half_width[node] * (1 + 1e-12)
            assert np.all(np.abs(X[m] - t.center[node]) <= half + 1e-12)
        if not t.is_leaf(node):
            assert sum(t.count[c] for c in t.children(node)) == t.count[node]
        elif len(m) > 1:
            # leaves with several points hold one location (or hit the depth cap)
            assert np.all(X[m] == X[m[0]]) or t.depth[node] == qt.MAX_DEPTH


@given(points)
def test_theta_zero_is_exact(X):
    t = qt.build(X)
    got = qt.accumulate_field(t, None, 0.0, qt.repulsion_kernel, 3)
    assert np.allclose(got, _exact(X, qt.repulsion_kernel, 3), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_theta_half_within_one_percent(seed):
    X = np.random.default_rng(seed).uniform(0, 1, (500, 2))
    t = qt.build(X)
    got = qt.accumulate_field(t, None, 0.5, qt.cauchy_kernel, 1)[:, 0]
    ref = _exact(X, qt.cauchy_kernel, 1)[:, 0]
    assert np.max(np.abs(got - ref) / ref) <= 1e-2


def test_far_cell_is_summarized_once():
    @numba.njit
    def counting(dx, dy, r2, weight, params, acc):
        acc[0] += 1.0
        acc[1] += weight

    # a unit cell of four points about 4 away: w/d = 0.25 < 0.5
    X = np.array([[0.0, 0.0], [4.0, 0.0], [5.0, 0.0], [4.0, 1.0], [5.0, 1.0]])
    t = qt.build(X)
    acc = qt.accumulate_field(t, [0], 0.5, counting, 2)
    assert acc[0, 1] == 4.0
    assert acc[0, 0] < 4.0


def test_explicit_targets_match_full_sweep():
    X = np.random.default_rng(9).normal(size=(200, 2))
    t = qt.build(X)
    full = qt.accumulate_field(t, None, 0.5, qt.entropy_kernel, 2, params=[0.05])
    some = qt.accumulate_field(t, [5, 17, 3], 0.5, qt.entropy_kernel, 2, params=[0.05])
    assert np.array_equal(full[[5, 17, 3]], some)


def test_deep_cluster_does_not_overflow():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(size=(50, 2)), 1e-12 * rng.normal(size=(50, 2)) + 3.0])
    t = qt.build(X)
    assert t.depth.max() <= qt.MAX_DEPTH
    got = qt.accumulate_field(t, None, 0.0, qt.cauchy_kernel, 1)
    assert np.allclose(got, _exact(X, qt.cauchy_kernel, 1))
