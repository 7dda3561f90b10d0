"""Undirected simple graphs in CSR form, edge-list parsing and BFS."""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np


class GraphParseError(ValueError):
    """Raised for malformed or empty edge-list input."""


class DisconnectedGraphWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph.

    ``indptr``/``indices`` hold a symmetric CSR adjacency with each row
    sorted ascending. Vertex ids are ``0..n-1``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    _degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        object.__setattr__(self, "_degree", np.diff(self.indptr))

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @property
    def degree(self) -> np.ndarray:
        return self._degree

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges ``u < v``, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n), self._degree)
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.indptr, other.indptr) and np.array_equal(
            self.indices, other.indices
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of ``(u, v)`` pairs on vertices ``0..n-1``.

        Self-loops and duplicates are dropped.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        if len(both):
            key = np.unique(both[:, 0] * n + both[:, 1])
            src, dst = np.divmod(key, n)
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(indptr, dst.astype(np.int64))


def parse_edge_list(text) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` or ``%`` are comments. A MatrixMarket banner
    makes the first non-comment line a size line, which is skipped. Tokens
    after the first two on a line (weights) are ignored. Ids are remapped to
    ``0..n-1`` in first-seen order; self-loops register their vertex but add
    no edge.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    ids: dict[int, int] = {}
    edges = []
    size_line_pending = False
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if lineno == 1 and line.lower().startswith("%%matrixmarket"):
            size_line_pending = True
            continue
        if not line or line[0] in "#%":
            continue
        if size_line_pending:
            size_line_pending = False
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphParseError(f"line {lineno}: expected two vertex ids, got {line!r}")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: malformed vertex id in {line!r}") from None
        ia = ids.setdefault(a, len(ids))
        ib = ids.setdefault(b, len(ids))
        if ia != ib:
            edges.append((ia, ib))
    if not edges:
        raise GraphParseError("graph has no edges")
    return Graph.from_edges(len(ids), edges)


def read_edge_list(path) -> Graph:
    with open(path, "rb") as fh:
        return parse_edge_list(fh.read())


def serialize_edge_list(g: Graph) -> str:
    """Edge-list text that parses back to exactly ``g``.

    Each vertex is introduced through an edge to a lower-numbered neighbor,
    or a ``v v`` line when it has none, so first-seen order equals id order.
    """
    lines = []
    for v in range(g.n):
        lower = g.neighbors(v)
        lower = lower[lower < v]
        if len(lower) == 0:
            lines.append(f"{v} {v}")
        lines.extend(f"{u} {v}" for u in lower)
    return "\n".join(lines) + "\n"


@numba.njit(cache=True)
def _bfs(indptr, indices, source, limit, dist):
    # dist must be pre-filled with -1; returns number of visited vertices
    queue = np.empty(len(dist), dtype=np.int64)
    queue[0] = source
    dist[source] = 0
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if limit >= 0 and du >= limit:
            continue
        for p in range(indptr[u], indptr[u + 1]):
            w = indices[p]
            if dist[w] < 0:
                dist[w] = du + 1
                queue[tail] = w
                tail += 1
    return tail


def bfs_hops(g: Graph, source: int, limit: int | None = None) -> np.ndarray:
    """Hop distances from ``source``; unreached vertices are ``-1``.

    With ``limit`` the traversal stops expanding at that radius.
    """
    if not 0 <= source < g.n:
        raise IndexError(f"source {source} out of range for n={g.n}")
    dist = np.full(g.n, -1, dtype=np.int64)
    _bfs(g.indptr, g.indices, source, -1 if limit is None else int(limit), dist)
    return dist


@numba.njit(cache=True)
def _component_labels(indptr, indices):
    n = len(indptr) - 1
    label = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    c = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = c
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for p in range(indptr[u], indptr[u + 1]):
                w = indices[p]
                if label[w] < 0:
                    label[w] = c
                    queue[tail] = w
                    tail += 1
        c += 1
    return label


def component_labels(g: Graph) -> np.ndarray:
    """Component index per vertex, numbered by smallest member id."""
    return _component_labels(g.indptr, g.indices)


def is_connected(g: Graph) -> bool:
    return g.n > 0 and bool(np.all(component_labels(g) == 0))


def induced_subgraph(g: Graph, vertices) -> Graph:
    """Subgraph on ``vertices`` (sorted), relabelled densely in id order."""
    keep = np.unique(np.asarray(vertices, dtype=np.int64))
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    e = g.edges()
    e = remap[e]
    e = e[(e >= 0).all(axis=1)]
    return Graph.from_edges(len(keep), e)


def largest_component(g: Graph) -> Graph:
    """Induced subgraph on the largest connected component.

    Ties go to the component containing the smallest vertex id.
    """
    labels = component_labels(g)
    sizes = np.bincount(labels)
    if len(sizes) == 1:
        return g
    # labels are assigned in order of smallest member, so argmax picks the tie rule
    best = int(np.argmax(sizes))
    warnings.warn(
        f"graph has {len(sizes)} components; keeping the largest "
        f"({sizes[best]} of {g.n} vertices)",
        DisconnectedGraphWarning,
        stacklevel=2,
    )
    return induced_subgraph(g, np.flatnonzero(labels == best))


@numba.njit(cache=True)
def _hop_balls(indptr, indices, radius):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    ptr = np.zeros(n + 1, dtype=np.int64)
    out = np.empty(max(16, 4 * n), dtype=np.int64)
    fill = 0
    for s in range(n):
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            if dist[u] >= radius:
                continue
            for p in range(indptr[u], indptr[u + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if fill + tail - 1 > len(out):
            grown = np.empty(max(2 * len(out), fill + tail), dtype=np.int64)
            grown[:fill] = out[:fill]
            out = grown
        for h in range(1, tail):
            out[fill] = queue[h]
            fill += 1
        ptr[s + 1] = fill
        for h in range(tail):
            dist[queue[h]] = -1
    return ptr, out[:fill]


def hop_balls(g: Graph, radius: int):
    """CSR lists of the vertices within ``radius`` hops of each vertex (itself excluded)."""
    return _hop_balls(g.indptr, g.indices, int(radius))
