"""Kernel sums over 2-D point sets by polynomial interpolation on a grid.

The bounding square is cut into ``I x I`` intervals with ``P`` equispaced
nodes per interval and axis (node ``t`` sits at ``lo + (t + 0.5) * h / P``),
so the whole node lattice is regular and a translation-invariant kernel
becomes a convolution. Charges are spread to the ``P x P`` nodes of each
point's interval with Lagrange weights, convolved with the kernel by FFT on
a zero-padded lattice, and interpolated back with the same weights.

Sums include the ``j == i`` term; callers remove it where it matters.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft

MIN_INTERVALS = 20
MAX_INTERVALS = 1000


def _cauchy1(r2, eps):
    return 1.0 / (1.0 + r2)


def _cauchy2(r2, eps):
    w = 1.0 / (1.0 + r2)
    return w * w


def _entropy(r2, eps):
    return 1.0 / (eps + r2)


def _constant(r2, eps):
    return np.ones_like(r2)


KERNELS = {
    "cauchy1": _cauchy1,
    "cauchy2": _cauchy2,
    "entropy": _entropy,
    "constant": _constant,  # test hook: every sum is the total charge
}


def kernel_value(kernel: str, r2, epsilon: float = 0.05):
    return KERNELS[kernel](np.asarray(r2, dtype=float), epsilon)


def choose_intervals(span: float, n: int | None = None) -> int:
    """Intervals per axis: about one per unit of layout span, clamped to [20, 1000]."""
    if not span > 0:
        raise ValueError("span must be positive")
    return int(min(max(math.ceil(span), MIN_INTERVALS), MAX_INTERVALS))


def _workers():
    w = int(os.environ.get("TSNET_THREADS", "0") or 0)
    return w if w > 0 else None


@dataclass(frozen=True)
class InterpolationGrid:
    lo: tuple[float, float]
    span: float
    intervals: int
    nodes_per_interval: int = 3
    kernel: str = "cauchy1"
    epsilon: float = 0.05

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.intervals < 1 or self.nodes_per_interval < 1 or not self.span > 0:
            raise ValueError("invalid grid geometry")

    @classmethod
    def fit(cls, points, kernel: str = "cauchy1", nodes_per_interval: int = 3,
            intervals: int | None = None, epsilon: float = 0.05) -> "InterpolationGrid":
        """Grid over the bounding square of ``points``."""
        pts = np.asarray(points, dtype=float)
        lo = pts.min(axis=0)
        extent = float((pts.max(axis=0) - lo).max())
        span = extent * (1.0 + 1e-12) if extent > 0 else 1.0
        if intervals is None:
            intervals = choose_intervals(span, len(pts))
        return cls((float(lo[0]), float(lo[1])), span, int(intervals), nodes_per_interval,
                   kernel, epsilon)

    def with_kernel(self, kernel: str) -> "InterpolationGrid":
        return replace(self, kernel=kernel)

    @property
    def nodes_per_axis(self) -> int:
        return self.intervals * self.nodes_per_interval

    @property
    def interval_width(self) -> float:
        return self.span / self.intervals

    @property
    def node_spacing(self) -> float:
        return self.interval_width / self.nodes_per_interval

    def node_coords(self, axis: int) -> np.ndarray:
        t = np.arange(self.nodes_per_axis) + 0.5
        return self.lo[axis] + t * self.node_spacing

    def node_kernel_matrix(self) -> np.ndarray:
        """Dense node-to-node kernel (small grids only; used by tests)."""
        xs, ys = np.meshgrid(self.node_coords(0), self.node_coords(1), indexing="ij")
        xy = np.column_stack([xs.ravel(), ys.ravel()])
        r2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)
        return kernel_value(self.kernel, r2, self.epsilon)


def _lagrange_weights(t, P):
    """Weights of the P equispaced local nodes at local coordinates t in [0, 1]."""
    s = (np.arange(P) + 0.5) / P
    W = np.ones((len(t), P))
    for k in range(P):
        for l in range(P):
            if l != k:
                W[:, k] *= (t - s[l]) / (s[k] - s[l])
    return W


def _stencil(points, grid: InterpolationGrid):
    """Flat node indices and tensor-product weights, each of shape (n, P*P)."""
    pts = np.asarray(points, dtype=float)
    P, I, N = grid.nodes_per_interval, grid.intervals, grid.nodes_per_axis
    rel = (pts - np.asarray(grid.lo)) / grid.interval_width
    tol = 1e-9 * I
    if (rel < -tol).any() or (rel > I + tol).any():
        raise ValueError("point outside the interpolation grid; rebuild the grid")
    box = np.clip(np.floor(rel), 0, I - 1).astype(np.int64)
    local = rel - box
    wx = _lagrange_weights(local[:, 0], P)
    wy = _lagrange_weights(local[:, 1], P)
    ix = box[:, 0:1] * P + np.arange(P)  # (n, P)
    iy = box[:, 1:2] * P + np.arange(P)
    flat = (ix[:, :, None] * N + iy[:, None, :]).reshape(len(pts), -1)
    weights = (wx[:, :, None] * wy[:, None, :]).reshape(len(pts), -1)
    return flat, weights


def _kernel_spectrum(grid: InterpolationGrid, shape):
    L = shape[0]
    o = np.arange(L)
    d = np.where(o <= L // 2, o, o - L) * grid.node_spacing
    r2 = d[:, None] ** 2 + d[None, :] ** 2
    K = kernel_value(grid.kernel, r2, grid.epsilon)
    return scipy.fft.rfft2(K, workers=_workers())


def interpolated_sums(points, charges, grid: InterpolationGrid, requests):
    """Shared spreading for several kernels on one grid geometry.

    ``requests`` maps kernel id to the indices of the charge rows it needs.
    Returns a dict mapping kernel id to an array ``(len(indices), n)``.
    """
    c = np.atleast_2d(np.asarray(charges, dtype=float))
    n = len(points)
    if c.shape[1] != n:
        raise ValueError("charges must have one value per point")
    N = grid.nodes_per_axis
    L = scipy.fft.next_fast_len(2 * N - 1, real=True)
    shape = (L, L)
    flat, weights = _stencil(points, grid)
    needed = sorted({int(i) for idx in requests.values() for i in idx})
    spectra = {}
    for i in needed:
        node_charge = np.bincount(flat.ravel(), weights=(weights * c[i][:, None]).ravel(),
                                  minlength=N * N).reshape(N, N)
        spectra[i] = scipy.fft.rfft2(node_charge, s=shape, workers=_workers())
    out = {}
    for kernel, idx in requests.items():
        khat = _kernel_spectrum(grid.with_kernel(kernel), shape)
        rows = []
        for i in idx:
            field = scipy.fft.irfft2(spectra[int(i)] * khat, s=shape, workers=_workers())[:N, :N]
            rows.append(np.sum(field.ravel()[flat] * weights, axis=1))
        out[kernel] = np.array(rows).reshape(len(idx), n)
    return out


def evaluate_field(points, charges, grid: InterpolationGrid) -> np.ndarray:
    """Approximate ``S_c(i) = sum_j K(X_i, X_j) c_j`` (self term included).

    ``charges`` may be one array of length n or a stack ``(m, n)``; the
    result has the same shape.
    """
    c = np.asarray(charges, dtype=float)
    stacked = np.atleast_2d(c)
    res = interpolated_sums(points, stacked, grid, {grid.kernel: range(len(stacked))})
    field = res[grid.kernel]
    return field[0] if c.ndim == 1 else field


def direct_field(points, charges, kernel: str, epsilon: float = 0.05, block: int = 2048):
    """Exact O(n^2) counterpart of :func:`evaluate_field`, including self terms."""
    pts = np.asarray(points, dtype=float)
    c = np.asarray(charges, dtype=float)
    stacked = np.atleast_2d(c)
    out = np.zeros((len(stacked), len(pts)))
    for a in range(0, len(pts), block):
        d = pts[a : a + block, None, :] - pts[None, :, :]
        K = kernel_value(kernel, (d * d).sum(-1), epsilon)
        out[:, a : a + block] = (K @ stacked.T).T
    return out[0] if c.ndim == 1 else out
