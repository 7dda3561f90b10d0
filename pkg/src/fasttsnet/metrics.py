"""Layout quality metrics: neighborhood preservation, stress, shape-based
similarity (relative neighborhood graph) and edge crossings."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numba
import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .graph import Graph, hop_balls

# relative slack so that mathematically equal distances are not treated as
# strictly smaller after rounding
TIE_RTOL = 1e-12
BRUTE_FORCE_EDGES = 2000
BRUTE_FORCE_RNG = 400


@dataclass(frozen=True)
class MetricsReport:
    np: float
    stress: float
    sb: float
    crossings: int
    crosslessness: float

    def to_record(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    def to_text(self) -> str:
        return "\n".join(f"{k} {v!r}" for k, v in self.to_record().items()) + "\n"


def _jaccard(a, b) -> float:
    a, b = set(a), set(b)
    union = len(a | b)
    return 1.0 if union == 0 else len(a & b) / union


def geometric_neighbors(X, v: int, k: int, tree: cKDTree | None = None) -> np.ndarray:
    """The ``k`` vertices closest to ``v`` in the layout, ties to the smaller id."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    k = min(k, n - 1)
    if k <= 0:
        return np.zeros(0, dtype=np.int64)
    if tree is not None and k + 9 < n:
        _, cand = tree.query(X[v], k=k + 9)
        cand = cand[cand != v]
        d = np.sqrt(((X[cand] - X[v]) ** 2).sum(axis=1))
        order = np.lexsort((cand, d))
        dk = d[order[k - 1]]
        if d.max() > dk * (1 + 1e-9) + 1e-300:
            return cand[order[:k]]
    others = np.delete(np.arange(n), v)
    d = np.sqrt(((X[others] - X[v]) ** 2).sum(axis=1))
    return others[np.lexsort((others, d))[:k]]


def neighborhood_preservation(g: Graph, emb, r: int = 2) -> float:
    """Mean Jaccard similarity of r-hop graph balls and equally sized layout neighborhoods."""
    X = np.asarray(emb, dtype=float)
    if g.n < 2:
        raise ValueError("need at least two vertices")
    ptr, ball = hop_balls(g, r)
    tree = cKDTree(X) if g.n > 64 else None
    total = 0.0
    for v in range(g.n):
        graph_nb = ball[ptr[v] : ptr[v + 1]]
        geo = geometric_neighbors(X, v, len(graph_nb), tree)
        total += _jaccard(graph_nb.tolist(), geo.tolist())
    return total / g.n


@numba.njit(cache=True)
def _stress_sums(indptr, indices, X):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    A = 0.0
    B = 0.0
    pairs = 0
    for s in range(n):
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for p in range(indptr[u], indptr[u + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        for h in range(1, tail):
            t = queue[h]
            dx = X[s, 0] - X[t, 0]
            dy = X[s, 1] - X[t, 1]
            ratio = math.sqrt(dx * dx + dy * dy) / dist[t]
            A += ratio
            B += ratio * ratio
            pairs += 1
        for h in range(tail):
            dist[queue[h]] = -1
    return A, B, pairs


def stress(g: Graph, emb) -> float:
    """Aggregated stress under the optimal uniform scale of the layout.

    With ``a = |X_i - X_j| / d_ij`` over ordered pairs, the best scale is
    ``s = sum a / sum a^2`` and the stress ``mean (1 - s a)^2`` equals
    ``1 - (sum a)^2 / (N sum a^2)``.
    """
    X = np.ascontiguousarray(emb, dtype=float)
    n = g.n
    A, B, pairs = _stress_sums(g.indptr, g.indices, X)
    if pairs != n * (n - 1):
        raise ValueError("stress needs a connected graph")
    if B == 0.0:
        return 1.0
    return max(0.0, 1.0 - A * A / (pairs * B))


def _separate_coincident(X):
    _, inverse, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    dup = counts[inverse.ravel()] > 1
    if not dup.any():
        return X
    scale = max(float(np.abs(X).max()), 1.0)
    jitter = np.random.default_rng(0).standard_normal(X.shape) * 1e-9 * scale
    return np.where(dup[:, None], X + jitter, X)


def _rng_brute(X):
    n = len(X)
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    edges = []
    for u in range(n - 1):
        du = D[u]
        thr = du[u + 1 :] * (1 - TIE_RTOL)  # (n-u-1,)
        witness = np.maximum(du[None, :], D[u + 1 :])  # rows v, columns w
        blocked = (witness < thr[:, None]).any(axis=1)
        for v in np.flatnonzero(~blocked) + u + 1:
            edges.append((u, v))
    return edges


def _delaunay_candidates(X):
    tri = Delaunay(X)
    s = tri.simplices
    cand = [s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]]
    if len(tri.coplanar):
        # Qhull leaves out near-duplicate points. Inserting one of them only
        # retriangulates around its nearest kept vertex, so its neighbors lie
        # in that vertex's 2-ring or among the other dropped points there.
        ptr, nbr = tri.vertex_neighbor_vertices
        ring = lambda q: set(nbr[ptr[q] : ptr[q + 1]].tolist()) | {int(q)}
        attached: dict = {}
        for p, q in zip(tri.coplanar[:, 0], tri.coplanar[:, 2]):
            attached.setdefault(int(q), []).append(int(p))
        for p, q in zip(tri.coplanar[:, 0], tri.coplanar[:, 2]):
            near = set().union(*(ring(w) for w in ring(q)))
            near |= {d for w in near for d in attached.get(w, ())}
            near.discard(int(p))
            cand.append(np.array([(p, x) for x in near], dtype=np.int64).reshape(-1, 2))
    return np.unique(np.sort(np.concatenate(cand), axis=1), axis=0)


def _member_pairs(loc_pairs, inverse):
    """Lift location pairs to point pairs, adding all pairs inside each location."""
    order = np.argsort(inverse, kind="stable")
    starts = np.searchsorted(inverse[order], np.arange(inverse.max() + 2))
    members = lambda a: order[starts[a] : starts[a + 1]]
    size = np.diff(starts)
    single = (size[loc_pairs[:, 0]] == 1) & (size[loc_pairs[:, 1]] == 1)
    first = order[starts[:-1]]
    out = [first[loc_pairs[single]]]
    for a, b in loc_pairs[~single]:
        ma, mb = members(a), members(b)
        out.append(np.array(np.meshgrid(ma, mb)).reshape(2, -1).T)
    for a in np.flatnonzero(size > 1):
        m = members(a)
        i, j = np.triu_indices(len(m), 1)
        out.append(np.column_stack([m[i], m[j]]))
    return np.unique(np.sort(np.concatenate(out), axis=1), axis=0)


def _rng_delaunay(X0):
    """RNG from Delaunay candidates of the distinct locations, checked on jittered points."""
    X0 = np.asarray(X0, dtype=float)
    U, inverse = np.unique(X0, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    X = _separate_coincident(X0)
    cand = _member_pairs(_delaunay_candidates(U), inverse)
    d = np.sqrt(((X[cand[:, 0]] - X[cand[:, 1]]) ** 2).sum(axis=1))
    tree = cKDTree(X)
    near = tree.query_ball_point(X[cand[:, 0]], d)
    edges = []
    for (u, v), duv, ws in zip(cand, d, near):
        ws = np.asarray(ws, dtype=np.int64)
        ws = ws[(ws != u) & (ws != v)]
        if len(ws):
            m = np.maximum(np.sqrt(((X[ws] - X[u]) ** 2).sum(axis=1)),
                           np.sqrt(((X[ws] - X[v]) ** 2).sum(axis=1)))
            if (m < duv * (1 - TIE_RTOL)).any():
                continue
        edges.append((int(u), int(v)))
    return edges


def relative_neighborhood_graph(emb):
    """Edges ``(u, v)`` with no ``w`` such that ``max(|uw|, |vw|) < |uv|``."""
    X = np.asarray(emb, dtype=float)
    if len(X) > BRUTE_FORCE_RNG:
        try:
            return _rng_delaunay(X)
        except QhullError:
            pass
    return _rng_brute(_separate_coincident(X))


def shape_based(g: Graph, emb) -> float:
    """Mean Jaccard similarity of graph adjacency and layout RNG adjacency."""
    n = g.n
    if n < 3:
        raise ValueError("need at least three vertices")
    nbrs = [set() for _ in range(n)]
    for u, v in relative_neighborhood_graph(emb):
        nbrs[u].add(v)
        nbrs[v].add(u)
    return sum(_jaccard(g.neighbors(v).tolist(), nbrs[v]) for v in range(n)) / n


@numba.njit(cache=True)
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@numba.njit(cache=True)
def _open_segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if o1 * o2 < 0.0 and o3 * o4 < 0.0:
        return True
    if o1 == 0.0 and o2 == 0.0 and o3 == 0.0 and o4 == 0.0:
        # collinear: count when the open segments overlap with positive length
        if abs(bx - ax) + abs(dx - cx) >= abs(by - ay) + abs(dy - cy):
            p0, p1, q0, q1 = min(ax, bx), max(ax, bx), min(cx, dx), max(cx, dx)
        else:
            p0, p1, q0, q1 = min(ay, by), max(ay, by), min(cy, dy), max(cy, dy)
        return min(p1, q1) > max(p0, q0)
    return False


@numba.njit(cache=True)
def _pair_crosses(E, X, a, b):
    u0, u1 = E[a, 0], E[a, 1]
    v0, v1 = E[b, 0], E[b, 1]
    if u0 == v0 or u0 == v1 or u1 == v0 or u1 == v1:
        return False
    return _open_segments_cross(X[u0, 0], X[u0, 1], X[u1, 0], X[u1, 1],
                                X[v0, 0], X[v0, 1], X[v1, 0], X[v1, 1])


@numba.njit(cache=True)
def _crossings_brute(E, X):
    m = len(E)
    count = 0
    for a in range(m):
        for b in range(a + 1, m):
            if _pair_crosses(E, X, a, b):
                count += 1
    return count


@numba.njit(cache=True)
def _crossings_grid(E, X, cells):
    m = len(E)
    lo_x = X[:, 0].min()
    lo_y = X[:, 1].min()
    span = max(X[:, 0].max() - lo_x, X[:, 1].max() - lo_y)
    if span <= 0.0:
        return _crossings_brute(E, X)
    size = span / cells * (1 + 1e-12)
    bx0 = np.empty(m, dtype=np.int64)
    bx1 = np.empty(m, dtype=np.int64)
    by0 = np.empty(m, dtype=np.int64)
    by1 = np.empty(m, dtype=np.int64)
    total = 0
    for e in range(m):
        xa, xb = X[E[e, 0], 0], X[E[e, 1], 0]
        ya, yb = X[E[e, 0], 1], X[E[e, 1], 1]
        bx0[e] = min(int((min(xa, xb) - lo_x) / size), cells - 1)
        bx1[e] = min(int((max(xa, xb) - lo_x) / size), cells - 1)
        by0[e] = min(int((min(ya, yb) - lo_y) / size), cells - 1)
        by1[e] = min(int((max(ya, yb) - lo_y) / size), cells - 1)
        total += (bx1[e] - bx0[e] + 1) * (by1[e] - by0[e] + 1)
    if total > 64 * m + 1024:
        return _crossings_brute(E, X)
    ptr = np.zeros(cells * cells + 1, dtype=np.int64)
    for e in range(m):
        for cx in range(bx0[e], bx1[e] + 1):
            for cy in range(by0[e], by1[e] + 1):
                ptr[cx * cells + cy + 1] += 1
    for c in range(cells * cells):
        ptr[c + 1] += ptr[c]
    fill = ptr[:-1].copy()
    members = np.empty(total, dtype=np.int64)
    for e in range(m):
        for cx in range(bx0[e], bx1[e] + 1):
            for cy in range(by0[e], by1[e] + 1):
                c = cx * cells + cy
                members[fill[c]] = e
                fill[c] += 1
    count = 0
    for cx in range(cells):
        for cy in range(cells):
            c = cx * cells + cy
            for p in range(ptr[c], ptr[c + 1]):
                a = members[p]
                for q in range(p + 1, ptr[c + 1]):
                    b = members[q]
                    # each pair is tested only in the first cell both boxes share
                    if max(bx0[a], bx0[b]) != cx or max(by0[a], by0[b]) != cy:
                        continue
                    if bx0[a] > bx1[b] or bx0[b] > bx1[a] or by0[a] > by1[b] or by0[b] > by1[a]:
                        continue
                    if _pair_crosses(E, X, a, b):
                        count += 1
    return count


def max_crossings(g: Graph) -> int:
    m = g.m
    deg = g.degree.astype(np.int64)
    return int(m * (m - 1) // 2 - np.sum(deg * (deg - 1) // 2))


def edge_crossings(g: Graph, emb, method: str = "auto"):
    """``(crossings, crosslessness)`` over pairs of edges without a shared endpoint."""
    X = np.ascontiguousarray(emb, dtype=float)
    E = np.ascontiguousarray(g.edges(), dtype=np.int64)
    if method == "auto":
        method = "brute" if len(E) <= BRUTE_FORCE_EDGES else "grid"
    if method == "brute":
        count = int(_crossings_brute(E, X))
    elif method == "grid":
        cells = max(1, int(math.sqrt(len(E))))
        count = int(_crossings_grid(E, X, cells))
    else:
        raise ValueError(f"unknown method {method!r}")
    cmax = max_crossings(g)
    return count, (1.0 if cmax == 0 else 1.0 - count / cmax)


def evaluate(g: Graph, emb, r: int = 2) -> MetricsReport:
    crossings, crossless = edge_crossings(g, emb)
    return MetricsReport(
        np=neighborhood_preservation(g, emb, r),
        stress=stress(g, emb),
        sb=shape_based(g, emb),
        crossings=crossings,
        crosslessness=crossless,
    )
