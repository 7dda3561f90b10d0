"""Pivot MDS initial layouts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, bfs_hops

DEFAULT_PIVOTS = 250


@dataclass(frozen=True)
class PivotConfig:
    pivot_count: int | None = None  # None -> min(n, 250)
    seed: int = 0

    def resolve(self, n: int) -> int:
        p = min(n, DEFAULT_PIVOTS) if self.pivot_count is None else self.pivot_count
        if not 1 <= p <= n:
            raise ValueError(f"pivot_count must be in [1, {n}], got {p}")
        return p


def select_pivots(g: Graph, cfg: PivotConfig = PivotConfig(), first: int | None = None):
    """Farthest-first pivots; returns ``(pivot ids, (p, n) hop-distance matrix)``.

    The first pivot is drawn from the seed unless ``first`` is given; each
    later pivot maximizes its hop distance to the chosen set, ties to the
    smallest id.
    """
    p = cfg.resolve(g.n)
    if first is None:
        first = int(np.random.default_rng(cfg.seed).integers(g.n))
    pivots = [first]
    rows = [bfs_hops(g, first)]
    nearest = rows[0].astype(float)
    nearest[nearest < 0] = np.inf
    for _ in range(p - 1):
        nxt = int(np.argmax(nearest))  # argmax returns the first (smallest id) maximum
        pivots.append(nxt)
        hops = bfs_hops(g, nxt)
        rows.append(hops)
        d = hops.astype(float)
        d[d < 0] = np.inf
        nearest = np.minimum(nearest, d)
    return np.array(pivots, dtype=np.int64), np.array(rows, dtype=float)


def _sign_fix(vecs):
    # make the largest-magnitude entry of each column positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def embed_from_distances(dist, seed: int = 0) -> np.ndarray:
    """Two-dimensional PMDS embedding from a ``(p, n)`` pivot distance matrix."""
    C = np.asarray(dist, dtype=float).T ** 2  # n x p
    n, p = C.shape
    if p < 2:
        raise ValueError("need at least two pivots")
    C = C - C.mean(axis=0, keepdims=True) - C.mean(axis=1, keepdims=True) + C.mean()
    C *= -0.5
    evals, evecs = np.linalg.eigh(C.T @ C)
    order = np.argsort(evals)[::-1][:2]
    V = _sign_fix(evecs[:, order])
    sv = np.sqrt(np.clip(evals[order], 0.0, None))
    # scale axes like classical MDS (exact when every vertex is a pivot)
    axis_scale = (p / n) ** 0.25 / np.sqrt(np.where(sv > 0, sv, 1.0))
    X = (C @ V) * axis_scale
    scale = max(np.abs(X).max(), 1.0)
    if sv[1] <= 1e-6 * max(sv[0], 1e-300):
        # rank-deficient: keep the layout non-degenerate with a tiny deterministic offset
        jitter = np.random.default_rng(seed).standard_normal(n)
        X[:, 1] = 1e-9 * scale * jitter
    X -= X.mean(axis=0)
    return X


def pivot_mds(g: Graph, cfg: PivotConfig = PivotConfig()) -> np.ndarray:
    """Pivot MDS layout of a connected graph, centered at the origin."""
    if g.n == 1:
        return np.zeros((1, 2))
    p = max(cfg.resolve(g.n), 2)
    _, dist = select_pivots(g, PivotConfig(p, cfg.seed))
    return embed_from_distances(dist, cfg.seed)


def embed(g: Graph, pivots, seed: int = 0) -> np.ndarray:
    """PMDS layout using an explicit pivot list."""
    dist = np.array([bfs_hops(g, int(v)) for v in pivots], dtype=float)
    return embed_from_distances(dist, seed)
