"""Deterministic test and benchmark graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

KINDS = ("grid", "path", "cycle", "ba", "star")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator {self.kind!r}")
        if any(int(p) < 1 for p in self.params):
            raise ValueError("generator parameters must be positive")


def grid(w: int, h: int) -> Graph:
    idx = np.arange(w * h).reshape(h, w)
    horiz = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    vert = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    return Graph.from_edges(w * h, np.concatenate([horiz, vert]))


def path(n: int) -> Graph:
    v = np.arange(n - 1)
    return Graph.from_edges(n, np.column_stack([v, v + 1]))


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    v = np.arange(n)
    return Graph.from_edges(n, np.column_stack([v, (v + 1) % n]))


def star(n: int) -> Graph:
    """Center 0 joined to leaves ``1..n-1``."""
    leaves = np.arange(1, n)
    return Graph.from_edges(n, np.column_stack([np.zeros_like(leaves), leaves]))


def barabasi_albert(n: int, attach: int, seed: int = 0) -> Graph:
    """Preferential attachment grown from a triangle on vertices 0, 1, 2.

    Every later vertex links to ``attach`` distinct earlier vertices drawn
    with probability proportional to degree, so ``m = 3 + attach * (n - 3)``.
    """
    if attach < 1:
        raise ValueError("attach must be >= 1")
    if n < 3 or attach > 3:
        raise ValueError("need n >= 3 and attach <= 3 for the triangle seed")
    rng = np.random.default_rng(seed)
    edges = [(0, 1), (1, 2), (0, 2)]
    ends = [0, 1, 1, 2, 0, 2]  # each vertex appears once per incident edge
    for v in range(3, n):
        chosen: list[int] = []
        while len(chosen) < attach:
            t = ends[int(rng.integers(len(ends)))]
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            edges.append((t, v))
            ends.extend((t, v))
    return Graph.from_edges(n, edges)


def generate(spec: GeneratorSpec) -> Graph:
    p = [int(x) for x in spec.params]
    if spec.kind == "grid":
        return grid(*p)
    if spec.kind == "path":
        return path(*p)
    if spec.kind == "cycle":
        return cycle(*p)
    if spec.kind == "star":
        return star(*p)
    return barabasi_albert(p[0], p[1], spec.seed)


def parse_uri(uri: str, seed: int = 0) -> GeneratorSpec:
    """``gen:grid:64x64``, ``gen:path:100``, ``gen:ba:1000:2`` and similar."""
    parts = uri.split(":")
    if len(parts) < 3 or parts[0] != "gen":
        raise ValueError(f"not a generator URI: {uri!r}")
    kind = parts[1]
    fields = [x for p in parts[2:] for x in p.split("x")]
    try:
        params = tuple(int(x) for x in fields)
    except ValueError:
        raise ValueError(f"bad generator parameters in {uri!r}") from None
    arity = {"grid": 2, "path": 1, "cycle": 1, "star": 1, "ba": 2}
    if kind in arity and len(params) != arity[kind]:
        raise ValueError(f"{kind} takes {arity[kind]} parameters")
    return GeneratorSpec(kind, params, seed)
