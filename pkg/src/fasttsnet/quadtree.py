"""Array-backed quadtree with Barnes-Hut field accumulation.

Nodes are stored breadth-first; an internal node's four children occupy
consecutive slots starting at ``child[node]`` (``-1`` marks a leaf). Each node
owns the contiguous slice ``order[start:end]`` of vertex ids, so membership
tests and direct leaf evaluation need no extra storage.

Cell kernels are numba-compiled functions with the signature
``kernel(dx, dy, r2, weight, params, acc)`` that add the contribution of
``weight`` coincident sources at offset ``(dx, dy) = target - source`` into
the accumulator row ``acc``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MAX_DEPTH = 64
BOX_PAD = 1e-9


@dataclass(frozen=True)
class Quadtree:
    points: np.ndarray
    center: np.ndarray  # (nodes, 2)
    half_width: np.ndarray
    count: np.ndarray
    com: np.ndarray  # center of mass, (nodes, 2)
    start: np.ndarray
    end: np.ndarray
    child: np.ndarray
    depth: np.ndarray
    order: np.ndarray  # vertex ids grouped by node
    position: np.ndarray  # inverse of order

    @property
    def n_nodes(self) -> int:
        return len(self.count)

    def is_leaf(self, node: int) -> bool:
        return self.child[node] < 0

    def children(self, node: int):
        c = self.child[node]
        return [] if c < 0 else [c, c + 1, c + 2, c + 3]

    def members(self, node: int) -> np.ndarray:
        return self.order[self.start[node] : self.end[node]]


@numba.njit(cache=True)
def _grow(a, size):
    out = np.empty((size,) + a.shape[1:], dtype=a.dtype)
    out[: len(a)] = a
    return out


@numba.njit(cache=True)
def _build(pts, max_depth, pad):
    n = pts.shape[0]
    xmin, xmax = pts[:, 0].min(), pts[:, 0].max()
    ymin, ymax = pts[:, 1].min(), pts[:, 1].max()
    half = 0.5 * max(xmax - xmin, ymax - ymin) + pad

    cap = 4 * n + 5
    center = np.empty((cap, 2))
    half_width = np.empty(cap)
    count = np.zeros(cap, dtype=np.int64)
    com = np.zeros((cap, 2))
    start = np.zeros(cap, dtype=np.int64)
    end = np.zeros(cap, dtype=np.int64)
    child = np.full(cap, -1, dtype=np.int64)
    depth = np.zeros(cap, dtype=np.int64)

    order = np.arange(n)
    scratch = np.empty(n, dtype=np.int64)
    quad = np.empty(n, dtype=np.int64)

    center[0, 0] = 0.5 * (xmin + xmax)
    center[0, 1] = 0.5 * (ymin + ymax)
    half_width[0] = half
    start[0] = 0
    end[0] = n
    n_nodes = 1
    node = 0
    while node < n_nodes:
        s, e = start[node], end[node]
        c = e - s
        count[node] = c
        if c == 0:
            node += 1
            continue
        sx = 0.0
        sy = 0.0
        lox, hix = np.inf, -np.inf
        loy, hiy = np.inf, -np.inf
        for p in range(s, e):
            x = pts[order[p], 0]
            y = pts[order[p], 1]
            sx += x
            sy += y
            lox = min(lox, x)
            hix = max(hix, x)
            loy = min(loy, y)
            hiy = max(hiy, y)
        com[node, 0] = sx / c
        com[node, 1] = sy / c
        coincident = lox == hix and loy == hiy
        if c == 1 or coincident or depth[node] >= max_depth:
            node += 1
            continue
        if n_nodes + 4 > cap:
            cap = 2 * cap
            center = _grow(center, cap)
            half_width = _grow(half_width, cap)
            count = _grow(count, cap)
            com = _grow(com, cap)
            start = _grow(start, cap)
            end = _grow(end, cap)
            child = _grow(child, cap)
            child[n_nodes:] = -1
            depth = _grow(depth, cap)
        cx, cy = center[node, 0], center[node, 1]
        h = half_width[node] * 0.5
        counts = np.zeros(4, dtype=np.int64)
        for p in range(s, e):
            v = order[p]
            q = (1 if pts[v, 0] >= cx else 0) + (2 if pts[v, 1] >= cy else 0)
            quad[p] = q
            counts[q] += 1
        offs = np.zeros(4, dtype=np.int64)
        acc = s
        for q in range(4):
            offs[q] = acc
            acc += counts[q]
        for p in range(s, e):
            q = quad[p]
            scratch[offs[q]] = order[p]
            offs[q] += 1
        order[s:e] = scratch[s:e]
        first = n_nodes
        child[node] = first
        acc = s
        for q in range(4):
            k = first + q
            center[k, 0] = cx + (h if q & 1 else -h)
            center[k, 1] = cy + (h if q & 2 else -h)
            half_width[k] = h
            start[k] = acc
            acc += counts[q]
            end[k] = acc
            child[k] = -1
            depth[k] = depth[node] + 1
        n_nodes += 4
        node += 1
    position = np.empty(n, dtype=np.int64)
    for p in range(n):
        position[order[p]] = p
    return (
        center[:n_nodes].copy(),
        half_width[:n_nodes].copy(),
        count[:n_nodes].copy(),
        com[:n_nodes].copy(),
        start[:n_nodes].copy(),
        end[:n_nodes].copy(),
        child[:n_nodes].copy(),
        depth[:n_nodes].copy(),
        order,
        position,
    )


def build(points, max_depth: int = MAX_DEPTH) -> Quadtree:
    """Quadtree over ``points`` with a square root box padded by 1e-9."""
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty (n, 2) array")
    bad = ~np.isfinite(pts).all(axis=1)
    if bad.any():
        raise ValueError(f"non-finite coordinate at vertex {int(np.flatnonzero(bad)[0])}")
    parts = _build(pts, max_depth, BOX_PAD)
    return Quadtree(pts, *parts)


@numba.njit(cache=True)
def _accumulate(pts, half_width, count, com, start, end, child, order, position,
                targets, theta, kernel, params, out):
    theta2 = theta * theta
    stack = np.empty(4 * MAX_DEPTH + 8, dtype=np.int64)
    for t in range(len(targets)):
        i = targets[t]
        xi = pts[i, 0]
        yi = pts[i, 1]
        pi = position[i]
        acc = out[t]
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            c = count[node]
            if c == 0:
                continue
            if child[node] < 0:
                for p in range(start[node], end[node]):
                    j = order[p]
                    if j == i:
                        continue
                    dx = xi - pts[j, 0]
                    dy = yi - pts[j, 1]
                    kernel(dx, dy, dx * dx + dy * dy, 1.0, params, acc)
                continue
            dx = xi - com[node, 0]
            dy = yi - com[node, 1]
            r2 = dx * dx + dy * dy
            w = 2.0 * half_width[node]
            own = start[node] <= pi and pi < end[node]
            if not own and r2 > 0.0 and w * w < theta2 * r2:
                kernel(dx, dy, r2, float(c), params, acc)
            else:
                first = child[node]
                for q in range(4):
                    stack[top] = first + q
                    top += 1


def accumulate_field(tree: Quadtree, targets, theta: float, kernel, n_out: int, params=None):
    """Barnes-Hut sum of ``kernel`` over all sources for each target vertex.

    A cell of width ``w`` whose center of mass lies at distance ``d`` from the
    target is summarized when ``w / d < theta``; cells containing the target
    itself are always opened, and the target never contributes to its own
    sum. ``targets=None`` means every vertex. Returns an array of shape
    ``(len(targets), n_out)``.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    params = np.zeros(1) if params is None else np.asarray(params, dtype=float)
    if targets is None:
        # visiting in tree order keeps neighboring targets on the same paths
        visit = tree.order
    else:
        visit = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    out = np.zeros((len(visit), n_out))
    _accumulate(tree.points, tree.half_width, tree.count, tree.com, tree.start, tree.end,
                tree.child, tree.order, tree.position, visit, float(theta), kernel,
                params, out)
    if targets is None:
        result = np.empty_like(out)
        result[visit] = out
        return result
    return out


@numba.njit(cache=True)
def cauchy_kernel(dx, dy, r2, weight, params, acc):
    """Student-t weight ``(1 + r^2)^-1``."""
    acc[0] += weight / (1.0 + r2)


@numba.njit(cache=True)
def repulsion_kernel(dx, dy, r2, weight, params, acc):
    """Accumulates the t-SNE normalizer term and the squared-kernel force."""
    q = 1.0 / (1.0 + r2)
    acc[0] += weight * q
    wq2 = weight * q * q
    acc[1] += wq2 * dx
    acc[2] += wq2 * dy


@numba.njit(cache=True)
def entropy_kernel(dx, dy, r2, weight, params, acc):
    """``weight * (dx, dy) / (eps + r^2)`` with ``eps = params[0]``."""
    q = weight / (params[0] + r2)
    acc[0] += q * dx
    acc[1] += q * dy
