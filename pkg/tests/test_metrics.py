import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import connected_graphs, random_connected_graph
from fasttsnet import metrics as M
from fasttsnet.fixtures import cycle, grid, path
from fasttsnet.graph import Graph


def _line(order, spacing=None):
    """Vertex ``order[i]`` placed at x = position i."""
    xs = np.cumsum([0.0] + list(spacing)) if spacing is not None else np.arange(len(order), dtype=float)
    X = np.zeros((len(order), 2))
    X[list(order), 0] = xs
    return X


K4 = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


# --- neighborhood preservation ---------------------------------------------

def test_np_ordered_path_is_one():
    g = path(7)
    assert M.neighborhood_preservation(g, _line(range(7))) == 1.0
    # jitter below a quarter of the spacing keeps every r-hop ball nearest
    wobble = 1 + np.random.default_rng(0).uniform(-0.2, 0.2, 6)
    assert M.neighborhood_preservation(g, _line(range(7), wobble)) == 1.0
    assert M.neighborhood_preservation(g, 25.0 * _line(range(7))) == 1.0


def test_np_uneven_spacing_can_reorder_balls():
    # vertex 3 sits 3 from vertex 6 but 6 from vertex 1
    X = _line(range(7), [1, 3, 3, 3, 1, 1])
    assert M.neighborhood_preservation(path(7), X) < 1.0


def test_np_k4_any_drawing():
    X = np.random.default_rng(0).normal(size=(4, 2))
    assert M.neighborhood_preservation(K4, X) == 1.0


def test_np_p4_shuffled_order():
    # x-order 0,2,1,3 with r=1: Jaccards 0, 1/3, 1/3, 0
    X = _line([0, 2, 1, 3])
    got = M.neighborhood_preservation(path(4), X, r=1)
    assert got == pytest.approx(1 / 6, abs=1e-15)
    assert got == pytest.approx(oracles.np_metric(path(4), X, r=1), abs=1e-15)


def test_geometric_neighbors_tie_goes_to_smaller_id():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert M.geometric_neighbors(X, 0, 2).tolist() == [1, 2]


def test_np_tree_path_matches_brute_on_integer_layout():
    # integer coordinates produce many distance ties; both paths must agree
    rng = np.random.default_rng(1)
    g = random_connected_graph(rng, 300, 200)
    X = rng.integers(0, 12, size=(300, 2)).astype(float)
    assert M.neighborhood_preservation(g, X) == pytest.approx(oracles.np_metric(g, X), abs=1e-12)


# --- stress ----------------------------------------------------------------

@pytest.mark.parametrize("scale", [1.0, 10.0])
def test_stress_straight_path(scale):
    assert M.stress(path(3), _line(range(3)) * scale) == pytest.approx(0.0, abs=1e-15)


def test_stress_c4_square():
    a = np.array([1.0] * 8 + [math.sqrt(2) / 2] * 4)
    s = a.sum() / (a**2).sum()
    expect = float(np.mean((1 - s * a) ** 2))
    assert M.stress(cycle(4), SQUARE) == pytest.approx(expect, rel=1e-12)
    assert M.stress(cycle(4), SQUARE) == pytest.approx(oracles.stress_metric(cycle(4), SQUARE), rel=1e-12)


def test_stress_rejects_disconnected():
    with pytest.raises(ValueError):
        M.stress(Graph.from_edges(4, [(0, 1), (2, 3)]), SQUARE)


def test_stress_all_coincident():
    assert M.stress(path(3), np.zeros((3, 2))) == 1.0


# --- shape-based -----------------------------------------------------------

def test_sb_equispaced_path():
    assert M.shape_based(path(6), _line(range(6))) == 1.0


def test_sb_equilateral_triangle():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    K3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert M.shape_based(K3, X) == 1.0


def test_sb_square_drops_diagonals():
    edges = sorted(tuple(sorted(e)) for e in M.relative_neighborhood_graph(SQUARE))
    assert edges == [(0, 1), (0, 3), (1, 2), (2, 3)]
    assert M.shape_based(cycle(4), SQUARE) == 1.0


def test_sb_coincident_points_are_separated():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    edges = M.relative_neighborhood_graph(X)
    assert len(edges) >= 2
    assert 0.0 <= M.shape_based(path(3), X) <= 1.0


@pytest.mark.parametrize("seed", range(3))
def test_rng_delaunay_matches_brute(seed):
    rng = np.random.default_rng(seed)
    # integer layouts stack several vertices per location
    X = rng.uniform(0, 1, (700, 2)) if seed == 2 else rng.integers(0, 15 + 15 * seed, (700, 2)).astype(float)
    a = {tuple(sorted(e)) for e in M._rng_delaunay(X)}
    b = {tuple(sorted(e)) for e in M._rng_brute(M._separate_coincident(X))}
    assert a == b


# --- crossings -------------------------------------------------------------

def test_k4_square_has_one_crossing():
    count, crossless = M.edge_crossings(K4, SQUARE)
    assert count == 1
    # 15 pairs minus 4 * 3 adjacent pairs
    assert M.max_crossings(K4) == 3
    assert crossless == pytest.approx(2 / 3)


def test_path_on_a_line_has_none():
    assert M.edge_crossings(path(9), _line(range(9))) == (0, 1.0)


def test_collinear_overlap_counts_once():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    X = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert M.edge_crossings(g, X)[0] == 1
    X[:, [0, 1]] = X[:, [1, 0]]  # same configuration, vertical
    assert M.edge_crossings(g, X)[0] == 1
    touching = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert M.edge_crossings(g, touching)[0] == 0


def test_star_has_no_crossing_pairs():
    g = Graph.from_edges(5, [(0, v) for v in range(1, 5)])
    assert M.max_crossings(g) == 0
    assert M.edge_crossings(g, np.random.default_rng(0).normal(size=(5, 2)))[1] == 1.0


@pytest.mark.parametrize("seed", range(8))
def test_grid_pruning_matches_brute(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 200))
    g = random_connected_graph(rng, n, int(rng.integers(30, 300)))
    X = rng.normal(size=(n, 2)) if seed % 2 else rng.integers(0, 6, (n, 2)).astype(float)
    brute = M.edge_crossings(g, X, "brute")[0]
    assert M.edge_crossings(g, X, "grid")[0] == brute
    if g.m <= 120:
        assert brute == oracles.crossings(g, X)


def test_grid_pruning_on_large_mesh():
    g = grid(60, 60)
    X = np.random.default_rng(2).normal(size=(g.n, 2))
    assert g.m > M.BRUTE_FORCE_EDGES
    assert M.edge_crossings(g, X, "auto")[0] == M.edge_crossings(g, X, "brute")[0]


def test_unknown_crossing_method():
    with pytest.raises(ValueError):
        M.edge_crossings(K4, SQUARE, "sweep")


# --- oracles and invariances ------------------------------------------------

@given(connected_graphs(min_n=3, max_n=12), st.integers(0, 2**32 - 1), st.booleans())
def test_all_metrics_match_oracles(g, seed, integer):
    rng = np.random.default_rng(seed)
    X = rng.integers(-4, 5, (g.n, 2)).astype(float) if integer else rng.normal(size=(g.n, 2))
    rep = M.evaluate(g, X)
    assert rep.np == pytest.approx(oracles.np_metric(g, X), abs=1e-9)
    assert rep.stress == pytest.approx(oracles.stress_metric(g, X), abs=1e-9)
    if len(np.unique(X, axis=0)) == g.n:
        assert rep.sb == pytest.approx(oracles.sb_metric(g, X), abs=1e-9)
    assert rep.crossings == oracles.crossings(g, X)


@given(connected_graphs(min_n=3, max_n=12), st.integers(0, 2**32 - 1),
       st.floats(0, 2 * math.pi), st.floats(0.1, 100), st.floats(-50, 50))
def test_similarity_invariance(g, seed, angle, scale, shift):
    X = np.random.default_rng(seed).normal(size=(g.n, 2))
    c, s = math.cos(angle), math.sin(angle)
    Y = scale * X @ np.array([[c, -s], [s, c]]) + shift
    a, b = M.evaluate(g, X), M.evaluate(g, Y)
    assert a.np == pytest.approx(b.np, abs=1e-12)
    assert a.stress == pytest.approx(b.stress, abs=1e-9)
    assert a.sb == pytest.approx(b.sb, abs=1e-12)
    assert a.crossings == b.crossings


def test_report_serialization():
    rep = M.evaluate(path(5), _line(range(5)))
    assert json.loads(rep.to_json()) == {
        "np": 1.0, "stress": 0.0, "sb": 1.0, "crossings": 0, "crosslessness": 1.0,
    }
    assert rep.to_text().splitlines()[0] == "np 1.0"
