"""High-dimensional affinities from graph hop distances.

Each vertex gets ``k`` nearest neighbors from a BFS that stops once ``k``
vertices are reached (ties at the cut-off hop distance are sampled
uniformly), a Gaussian bandwidth calibrated to the target perplexity, and
the rows are symmetrized into a joint distribution summing to one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp

from .graph import Graph

log = logging.getLogger(__name__)

SIGMA_MIN = 1e-10
SIGMA_MAX = 1e10
PERPLEXITY_TOL = 1e-10  # log2 units; well inside the 1e-5 contract
MAX_SEARCH_STEPS = 200


@numba.njit(cache=True)
def _knn_candidates(indptr, indices, sources, k):
    """Layered BFS from each source, stopping after the layer that reaches k.

    Returns CSR-style candidate lists (ids, hop distances) in BFS order, and
    for each source the number of candidates strictly closer than the
    cut-off layer. Everything past that prefix is the tied cut-off layer.
    """
    n = len(indptr) - 1
    ns = len(sources)
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    ptr = np.zeros(ns + 1, dtype=np.int64)
    n_fixed = np.zeros(ns, dtype=np.int64)
    cap = max(16, ns * (k + 1))
    ids = np.empty(cap, dtype=np.int64)
    hops = np.empty(cap, dtype=np.int64)
    fill = 0
    for s in range(ns):
        src = sources[s]
        dist[src] = 0
        queue[0] = src
        tail = 1
        layer_start = 0
        layer_end = 1
        found = 0
        fixed = 0
        while found < k and layer_start < layer_end:
            fixed = found
            # expand one whole layer
            for h in range(layer_start, layer_end):
                u = queue[h]
                for p in range(indptr[u], indptr[u + 1]):
                    w = indices[p]
                    if dist[w] < 0:
                        dist[w] = dist[u] + 1
                        queue[tail] = w
                        tail += 1
            found += tail - layer_end
            layer_start = layer_end
            layer_end = tail
        count = tail - 1
        if fill + count > cap:
            new_cap = max(cap * 2, fill + count)
            ids2 = np.empty(new_cap, dtype=np.int64)
            hops2 = np.empty(new_cap, dtype=np.int64)
            ids2[:fill] = ids[:fill]
            hops2[:fill] = hops[:fill]
            ids, hops, cap = ids2, hops2, new_cap
        for h in range(1, tail):
            ids[fill] = queue[h]
            hops[fill] = dist[queue[h]]
            fill += 1
        ptr[s + 1] = fill
        n_fixed[s] = fixed
        for h in range(tail):
            dist[queue[h]] = -1
    return ptr, ids[:fill], hops[:fill], n_fixed


def _select(ids, hops, fixed, k, rng):
    """Keep the closer layers whole and sample the rest of the cut-off layer."""
    need = min(k, len(ids)) - fixed
    if need < len(ids) - fixed:
        pick = fixed + rng.choice(len(ids) - fixed, size=need, replace=False)
        keep = np.concatenate([np.arange(fixed), pick])
    else:
        keep = np.arange(len(ids))
    ids, hops = ids[keep], hops[keep]
    order = np.lexsort((ids, hops))
    return ids[order], hops[order]


def partial_knn(g: Graph, v: int, k: int, rng: np.random.Generator):
    """The ``min(k, n-1)`` hop-nearest vertices of ``v`` as ``(id, hops)`` pairs.

    Vertices tied at the cut-off distance are chosen uniformly at random.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ptr, ids, hops, fixed = _knn_candidates(
        g.indptr, g.indices, np.array([v], dtype=np.int64), k
    )
    sel_ids, sel_hops = _select(ids, hops, int(fixed[0]), k, rng)
    return list(zip(sel_ids.tolist(), sel_hops.tolist()))


def _row_entropy_bits(d2, sigma):
    """Shannon entropy (bits) and normalized rows for squared distances."""
    shifted = d2 - d2.min(axis=-1, keepdims=True)
    logits = -shifted / (2.0 * sigma[..., None] ** 2)
    w = np.exp(logits)
    z = w.sum(axis=-1, keepdims=True)
    p = w / z
    # H = log z - sum p * logits, in nats
    h = np.log(z[..., 0]) - np.sum(p * logits, axis=-1)
    return h / np.log(2.0), p


def achievable_perplexity(distances) -> tuple[np.ndarray, np.ndarray]:
    """Bounds of the perplexity a row can reach as sigma sweeps (0, inf).

    The lower end is the number of entries tied at the minimum distance, the
    upper end is the row length.
    """
    d = np.atleast_2d(np.asarray(distances, dtype=float))
    lo = np.sum(d == d.min(axis=1, keepdims=True), axis=1)
    hi = np.full(len(d), d.shape[1])
    return lo, hi


def calibrate_rows(distances, perplexity):
    """Batched bandwidth search over equal-length rows.

    Returns ``(sigmas, rows, achieved_perplexity)``. Each row's target is the
    requested perplexity clipped to what the row can achieve.
    """
    d = np.atleast_2d(np.asarray(distances, dtype=float))
    if d.shape[1] == 0:
        raise ValueError("empty distance row")
    lo_p, hi_p = achievable_perplexity(d)
    clipped = np.clip(float(perplexity), lo_p, hi_p)
    target = np.log2(clipped)
    d2 = d * d
    n = len(d)
    sigma = np.ones(n)
    lo = np.full(n, SIGMA_MIN)
    hi = np.full(n, SIGMA_MAX)
    have_lo = np.zeros(n, dtype=bool)
    have_hi = np.zeros(n, dtype=bool)
    h, p = _row_entropy_bits(d2, sigma)
    active = np.abs(h - target) > PERPLEXITY_TOL
    for _ in range(MAX_SEARCH_STEPS):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        too_wide = h[idx] > target[idx]
        s = sigma[idx]
        hi[idx] = np.where(too_wide, s, hi[idx])
        have_hi[idx] |= too_wide
        lo[idx] = np.where(too_wide, lo[idx], s)
        have_lo[idx] |= ~too_wide
        bracketed = have_lo[idx] & have_hi[idx]
        grown = np.where(too_wide, s / 2.0, s * 2.0)
        s_new = np.where(bracketed, np.sqrt(lo[idx] * hi[idx]), grown)
        sigma[idx] = np.clip(s_new, SIGMA_MIN, SIGMA_MAX)
        h_i, p_i = _row_entropy_bits(d2[idx], sigma[idx])
        h[idx] = h_i
        p[idx] = p_i
        active[idx] = np.abs(h_i - target[idx]) > PERPLEXITY_TOL
    if active.any():
        log.warning("perplexity search did not converge for %d rows", int(active.sum()))
    # a target clipped to an end of the reachable range is the sigma -> 0 or
    # sigma -> inf limit; use the exact limiting row there
    at_hi = clipped == hi_p
    at_lo = (clipped == lo_p) & ~at_hi
    if at_hi.any():
        p[at_hi] = 1.0 / d.shape[1]
        sigma[at_hi] = SIGMA_MAX
        h[at_hi] = np.log2(hi_p[at_hi])
    if at_lo.any():
        ties = d[at_lo] == d[at_lo].min(axis=1, keepdims=True)
        p[at_lo] = ties / lo_p[at_lo][:, None]
        sigma[at_lo] = SIGMA_MIN
        h[at_lo] = np.log2(lo_p[at_lo])
    return sigma, p, np.exp2(h)


def calibrate_sigma(distances, perplexity):
    """Bandwidth and conditional row ``p_{j|i}`` for one row of hop distances."""
    sigma, rows, _ = calibrate_rows(np.asarray(distances, dtype=float)[None, :], perplexity)
    return float(sigma[0]), rows[0]


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric joint probabilities ``p_ij`` stored as CSR (both orientations)."""

    n: int
    perplexity: float
    k: int
    P: sp.csr_matrix
    sigmas: np.ndarray
    row_perplexity: np.ndarray

    def rows(self):
        """Per-vertex list of ``(neighbor, p_ij)``."""
        out = []
        for i in range(self.n):
            lo, hi = self.P.indptr[i], self.P.indptr[i + 1]
            out.append(list(zip(self.P.indices[lo:hi].tolist(), self.P.data[lo:hi].tolist())))
        return out

    def pairs(self):
        """Unordered pairs ``(i, j, p_ij)`` with ``i < j`` as arrays."""
        coo = self.P.tocoo()
        mask = coo.row < coo.col
        return coo.row[mask].astype(np.int64), coo.col[mask].astype(np.int64), coo.data[mask]

    def total(self) -> float:
        return float(self.P.sum())

    def dump(self, fh):
        coo = self.P.tocoo()
        for i, j, p in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            fh.write(f"{i} {j} {p:.17g}\n")


def conditional_rows(g: Graph, k: int, seed: int):
    """Neighbor ids and hop distances for every vertex as ``(n, k)`` arrays."""
    n = g.n
    k = min(k, n - 1)
    ptr, ids, hops, fixed = _knn_candidates(g.indptr, g.indices, np.arange(n), k)
    nbr = np.empty((n, k), dtype=np.int64)
    dist = np.empty((n, k), dtype=np.int64)
    for v in range(n):
        a, b = ptr[v], ptr[v + 1]
        if b - a != k:
            if b - a < k:
                raise ValueError("graph must be connected to build affinities")
            rng = np.random.default_rng([seed, v])
            nbr[v], dist[v] = _select(ids[a:b], hops[a:b], int(fixed[v]), k, rng)
        else:
            order = np.lexsort((ids[a:b], hops[a:b]))
            nbr[v], dist[v] = ids[a:b][order], hops[a:b][order]
    return nbr, dist


def build_affinities(g: Graph, perplexity: float = 40.0, seed: int = 0, k: int | None = None) -> AffinityMatrix:
    """Sparse symmetric affinities with ``k = min(3u, n-1)`` neighbors per vertex."""
    if perplexity < 1:
        raise ValueError("perplexity must be >= 1")
    if g.n < 2:
        raise ValueError("need at least two vertices")
    n = g.n
    if k is None:
        k = int(3 * perplexity)
    k = max(1, min(int(k), n - 1))
    nbr, dist = conditional_rows(g, k, seed)
    sigmas, cond, achieved = calibrate_rows(dist, perplexity)
    rows = np.repeat(np.arange(n), k)
    C = sp.csr_matrix((cond.ravel(), (rows, nbr.ravel())), shape=(n, n))
    P = ((C + C.T) / (2.0 * n)).tocsr()
    P.eliminate_zeros()
    P.sort_indices()
    return AffinityMatrix(
        n=n,
        perplexity=float(perplexity),
        k=k,
        P=P,
        sigmas=sigmas,
        row_perplexity=achieved,
    )
