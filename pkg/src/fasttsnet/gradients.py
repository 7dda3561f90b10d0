"""Gradient of the tsNET cost ``C = C_KL + C_CMP + C_ENT``.

All gradients here are true derivatives of :func:`cost`; the optimizer steps
along their negation. Repulsion and entropy each have three interchangeable
backends: ``exact`` (double loop), ``bh`` (quadtree) and ``fft``
(interpolated sums).

The entropy potential is ``-lambda_r / (4 n^2) * sum_{i != j} log(eps + |X_i - X_j|^2)``,
whose gradient is ``-lambda_r / n^2 * sum_j (X_i - X_j) / (eps + |X_i - X_j|^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from . import fftfield, quadtree
from .affinity import AffinityMatrix

PRESETS = {
    # preset: (KL repulsion mode, entropy mode)
    "exact": ("exact", "exact"),
    "bh": ("bh", "bh"),
    "fit": ("fft", "bh"),
    "linear": ("fft", "fft"),
}


@dataclass(frozen=True)
class CostMultipliers:
    lambda_kl: float = 1.0
    lambda_c: float = 1.2
    lambda_r: float = 0.0
    epsilon: float = 1.0 / 20.0

    def __post_init__(self):
        if min(self.lambda_kl, self.lambda_c, self.lambda_r) < 0:
            raise ValueError("multipliers must be non-negative")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass
class GradientBuffers:
    attraction: np.ndarray
    repulsion: np.ndarray
    Z: float
    compression: np.ndarray
    entropy: np.ndarray
    total: np.ndarray

    def kl(self) -> np.ndarray:
        return self.attraction - 4.0 * self.repulsion / self.Z

    def recombine(self, mult: CostMultipliers) -> np.ndarray:
        return (mult.lambda_kl * self.kl() + mult.lambda_c * self.compression
                + mult.lambda_r * self.entropy)


@numba.njit(cache=True, error_model="numpy")
def _attraction(X, rows, cols, vals):
    out = np.zeros((X.shape[0], 2))
    m = len(rows)
    e = 0
    while e < m:
        # rows arrive grouped, so row sums stay in registers
        i = rows[e]
        xi, yi = X[i, 0], X[i, 1]
        ax = 0.0
        ay = 0.0
        while e < m and rows[e] == i:
            j = cols[e]
            dx = xi - X[j, 0]
            dy = yi - X[j, 1]
            f = 4.0 * vals[e] / (1.0 + dx * dx + dy * dy)
            ax += f * dx
            ay += f * dy
            out[j, 0] -= f * dx
            out[j, 1] -= f * dy
            e += 1
        out[i, 0] += ax
        out[i, 1] += ay
    return out


def kl_attraction(aff: AffinityMatrix, emb, pairs=None) -> np.ndarray:
    """``4 * sum_j p_ij (1 + r_ij^2)^-1 (X_i - X_j)`` over stored pairs, O(kn)."""
    X = np.ascontiguousarray(emb, dtype=float)
    if aff.n != len(X):
        raise ValueError("affinity and embedding sizes differ")
    i, j, p = aff.pairs() if pairs is None else pairs
    return _attraction(X, i, j, p)


@numba.njit(cache=True, error_model="numpy")
def _exact_repulsion(X):
    n = X.shape[0]
    R = np.zeros((n, 2))
    Z = 0.0
    for i in range(n):
        xi, yi = X[i, 0], X[i, 1]
        rx = 0.0
        ry = 0.0
        zi = 0.0
        for j in range(n):
            if j == i:
                continue
            dx = xi - X[j, 0]
            dy = yi - X[j, 1]
            q = 1.0 / (1.0 + dx * dx + dy * dy)
            zi += q
            q2 = q * q
            rx += q2 * dx
            ry += q2 * dy
        R[i, 0] = rx
        R[i, 1] = ry
        Z += zi
    return R, Z


@numba.njit(cache=True, error_model="numpy")
def _exact_entropy(X, eps):
    n = X.shape[0]
    S = np.zeros((n, 2))
    for i in range(n):
        xi, yi = X[i, 0], X[i, 1]
        sx = 0.0
        sy = 0.0
        for j in range(n):
            if j == i:
                continue
            dx = xi - X[j, 0]
            dy = yi - X[j, 1]
            q = 1.0 / (eps + dx * dx + dy * dy)
            sx += q * dx
            sy += q * dy
        S[i, 0] = sx
        S[i, 1] = sy
    return S


def _fft_requests(X, want_kl: bool, want_entropy: bool, epsilon: float, grid=None):
    if grid is None:
        grid = fftfield.InterpolationGrid.fit(X, epsilon=epsilon)
    charges = np.vstack([np.ones(len(X)), X[:, 0], X[:, 1]])
    req = {}
    if want_kl:
        req["cauchy1"] = [0]
        req["cauchy2"] = [0, 1, 2]
    if want_entropy:
        req["entropy"] = [0, 1, 2]
    return fftfield.interpolated_sums(X, charges, grid, req)


def _fft_repulsion_from(X, sums):
    phi = sums["cauchy1"][0]
    psi = sums["cauchy2"]
    Z = float(np.sum(phi) - len(X))  # drop the K(0) = 1 self terms
    # the grid self term cancels in x_i * psi_0 - psi_x
    R = np.column_stack([X[:, 0] * psi[0] - psi[1], X[:, 1] * psi[0] - psi[2]])
    return R, Z


def _fft_entropy_from(X, sums):
    h = sums["entropy"]
    n = len(X)
    S = np.column_stack([X[:, 0] * h[0] - h[1], X[:, 1] * h[0] - h[2]])
    return -S / n**2


def kl_repulsion(emb, mode: str = "exact", theta: float = 0.5, tree=None):
    """Unnormalized repulsion sums ``R_i`` and the normalizer ``Z``.

    ``R_i = sum_{j != i} (1 + r_ij^2)^-2 (X_i - X_j)``,
    ``Z = sum_{k != l} (1 + r_kl^2)^-1``.
    """
    X = np.ascontiguousarray(emb, dtype=float)
    if mode == "exact":
        return _exact_repulsion(X)
    if mode == "bh":
        tree = quadtree.build(X) if tree is None else tree
        acc = quadtree.accumulate_field(tree, None, theta, quadtree.repulsion_kernel, 3)
        return acc[:, 1:3].copy(), float(acc[:, 0].sum())
    if mode == "fft":
        return _fft_repulsion_from(X, _fft_requests(X, True, False, 0.05))
    raise ValueError(f"unknown mode {mode!r}")


def compression_gradient(emb) -> np.ndarray:
    """Gradient of ``1/(2n) sum |X_i|^2``."""
    X = np.asarray(emb, dtype=float)
    return X / len(X)


def entropy_gradient(emb, epsilon: float = 0.05, mode: str = "exact", theta: float = 0.5,
                     tree=None) -> np.ndarray:
    """Unweighted entropy gradient ``-(1/n^2) sum_{j != i} (X_i - X_j) / (eps + r_ij^2)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    X = np.ascontiguousarray(emb, dtype=float)
    n = len(X)
    if mode == "exact":
        return -_exact_entropy(X, float(epsilon)) / n**2
    if mode == "bh":
        tree = quadtree.build(X) if tree is None else tree
        acc = quadtree.accumulate_field(tree, None, theta, quadtree.entropy_kernel, 2,
                                        params=np.array([epsilon]))
        return -acc / n**2
    if mode == "fft":
        return _fft_entropy_from(X, _fft_requests(X, False, True, epsilon))
    raise ValueError(f"unknown mode {mode!r}")


def total_gradient(aff: AffinityMatrix, emb, mult: CostMultipliers, preset: str = "exact",
                   theta: float = 0.5, pairs=None) -> GradientBuffers:
    """All gradient parts and their weighted total for one backend preset."""
    try:
        rep_mode, ent_mode = PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown preset {preset!r}") from None
    X = np.ascontiguousarray(emb, dtype=float)
    n = len(X)
    need_kl = mult.lambda_kl > 0
    need_ent = mult.lambda_r > 0

    sums = None
    if (need_kl and rep_mode == "fft") or (need_ent and ent_mode == "fft"):
        sums = _fft_requests(X, need_kl and rep_mode == "fft",
                             need_ent and ent_mode == "fft", mult.epsilon)
    tree = None
    if (need_kl and rep_mode == "bh") or (need_ent and ent_mode == "bh"):
        tree = quadtree.build(X)

    if need_kl:
        attraction = kl_attraction(aff, X, pairs)
        if rep_mode == "fft":
            R, Z = _fft_repulsion_from(X, sums)
        else:
            R, Z = kl_repulsion(X, rep_mode, theta, tree)
    else:
        attraction = np.zeros((n, 2))
        R, Z = np.zeros((n, 2)), 1.0
    compression = compression_gradient(X)
    if need_ent:
        if ent_mode == "fft":
            entropy = _fft_entropy_from(X, sums)
        else:
            entropy = entropy_gradient(X, mult.epsilon, ent_mode, theta, tree)
    else:
        entropy = np.zeros((n, 2))
    buf = GradientBuffers(attraction, R, Z, compression, entropy, np.zeros((n, 2)))
    buf.total = buf.recombine(mult)
    return buf


def cost_terms(aff: AffinityMatrix, emb, mult: CostMultipliers) -> dict:
    """Exact values of the three weighted cost terms (O(n^2))."""
    X = np.asarray(emb, dtype=float)
    n = len(X)
    d = X[:, None, :] - X[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    W = 1.0 / (1.0 + r2)
    np.fill_diagonal(W, 0.0)
    Z = W.sum()
    coo = aff.P.tocoo()
    p = coo.data
    q = W[coo.row, coo.col] / Z
    kl = float(np.sum(p * np.log(p / q)))
    cmp_ = float(np.sum(X * X) / (2.0 * n))
    L = np.log(mult.epsilon + r2)
    np.fill_diagonal(L, 0.0)
    ent = float(-L.sum() / (4.0 * n**2))
    return {
        "kl": mult.lambda_kl * kl,
        "compression": mult.lambda_c * cmp_,
        "entropy": mult.lambda_r * ent,
    }


def cost(aff: AffinityMatrix, emb, mult: CostMultipliers) -> float:
    return float(sum(cost_terms(aff, emb, mult).values()))
