"""Staged momentum gradient descent producing tsNET layouts."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .affinity import AffinityMatrix, build_affinities
from .gradients import PRESETS, CostMultipliers, total_gradient
from .graph import Graph, is_connected
from .pivot_mds import PivotConfig, pivot_mds

log = logging.getLogger(__name__)

MAX_RETRIES = 10


class NumericalError(RuntimeError):
    """A step kept producing non-finite positions after repeated step halving."""


@dataclass(frozen=True)
class Stage:
    start: int
    lambda_kl: float
    lambda_c: float
    lambda_r: float


DEFAULT_STAGES = (
    Stage(0, 1.0, 1.2, 0.0),
    Stage(250, 1.0, 0.01, 0.6),
)
DEFAULT_MOMENTUM = ((0, 0.5), (250, 0.8))


@dataclass(frozen=True)
class LayoutConfig:
    preset: str = "exact"
    iterations: int = 500
    perplexity: float = 40.0
    theta: float = 0.5
    epsilon: float = 1.0 / 20.0
    learning_rate: float = 50.0
    momentum: tuple = DEFAULT_MOMENTUM
    stages: tuple = DEFAULT_STAGES
    seed: int = 0
    k: int | None = None  # neighbors per vertex; None -> 3 * perplexity
    pivot_count: int | None = None
    stable_step: bool = True  # cap the learning rate by a curvature bound

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        starts = [s.start for s in self.stages]
        if not starts or starts[0] != 0 or starts != sorted(starts):
            raise ValueError("stages must be sorted by start iteration, first at 0")

    def stage_index(self, it: int) -> int:
        idx = 0
        for k, s in enumerate(self.stages):
            if s.start <= it:
                idx = k
        return idx

    def multipliers(self, it: int) -> CostMultipliers:
        s = self.stages[self.stage_index(it)]
        return CostMultipliers(s.lambda_kl, s.lambda_c, s.lambda_r, self.epsilon)

    def momentum_at(self, it: int) -> float:
        value = self.momentum[0][1]
        for start, mu in self.momentum:
            if start <= it:
                value = mu
        return value


@dataclass
class State:
    positions: np.ndarray
    velocity: np.ndarray
    iteration: int = 0
    learning_rate: float = 50.0


@dataclass
class TraceRow:
    iteration: int
    stage: int
    grad_inf_norm: float
    millis: float


@dataclass
class LayoutResult:
    positions: np.ndarray
    trace: list = field(default_factory=list)
    setup_ms: float = 0.0
    affinities: AffinityMatrix | None = None

    def mean_iteration_ms(self, start: int = 0) -> float:
        rows = [t.millis for t in self.trace if t.iteration >= start]
        return float(np.mean(rows)) if rows else float("nan")


def stable_learning_rate(aff: AffinityMatrix, cfg: LayoutConfig) -> float:
    """Largest rate for which heavy-ball descent is stable on the convex part of the cost.

    Attraction has Hessian norm at most ``8 max_i sum_j p_ij`` per unit of
    lambda_KL and compression adds ``lambda_c / n``. Momentum mu allows steps
    up to ``2 (1 + mu) / L``; the smallest scheduled mu is used.
    """
    row = float(np.asarray(aff.P.sum(axis=1)).max()) if aff.P.nnz else 0.0
    L = max(8.0 * s.lambda_kl * row + s.lambda_c / aff.n for s in cfg.stages)
    mu = min(m for _, m in cfg.momentum)
    return math.inf if L <= 0 else 2.0 * (1.0 + mu) / L


def step(state: State, gradient, momentum: float) -> State:
    """One momentum update: ``v <- mu v - eta g``, ``X <- X + v``."""
    v = momentum * state.velocity - state.learning_rate * np.asarray(gradient)
    return State(state.positions + v, v, state.iteration + 1, state.learning_rate)


def _recenter(s: State) -> State:
    s.positions = s.positions - s.positions.mean(axis=0)
    return s


def run(g: Graph, cfg: LayoutConfig = LayoutConfig(), callback=None,
        affinities: AffinityMatrix | None = None, init=None) -> LayoutResult:
    """Full pipeline: affinities, Pivot MDS start, then ``cfg.iterations`` steps.

    ``callback(iteration, stage, grad_inf_norm)`` runs after every step.
    ``affinities`` and ``init`` may be supplied to skip the setup stages.
    """
    if not is_connected(g):
        raise ValueError("graph must be connected")
    t0 = time.perf_counter()
    aff = affinities if affinities is not None else build_affinities(g, cfg.perplexity, cfg.seed, cfg.k)
    X = pivot_mds(g, PivotConfig(cfg.pivot_count, cfg.seed)) if init is None else np.array(init, dtype=float)
    setup_ms = (time.perf_counter() - t0) * 1e3
    pairs = aff.pairs()

    lr = cfg.learning_rate
    if cfg.stable_step:
        cap = stable_learning_rate(aff, cfg)
        if cap < lr:
            log.info("learning rate %g capped at %.4g for stability", lr, cap)
            lr = cap
    state = State(X - X.mean(axis=0), np.zeros_like(X), 0, lr)
    trace = []
    for it in range(cfg.iterations):
        t_it = time.perf_counter()
        mult = cfg.multipliers(it)
        mu = cfg.momentum_at(it)
        grad = total_gradient(aff, state.positions, mult, cfg.preset, cfg.theta, pairs).total
        for attempt in range(MAX_RETRIES + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                nxt = _recenter(step(state, grad, mu))
            if np.isfinite(nxt.positions).all():
                break
            if attempt == MAX_RETRIES:
                raise NumericalError(
                    f"non-finite positions at iteration {it} after {MAX_RETRIES} step halvings"
                )
            state.learning_rate *= 0.5
            log.warning("non-finite step at iteration %d; learning rate -> %g", it, state.learning_rate)
        state = nxt
        gnorm = float(np.abs(grad).max()) if grad.size else 0.0
        stage = cfg.stage_index(it)
        trace.append(TraceRow(it, stage, gnorm, (time.perf_counter() - t_it) * 1e3))
        if callback is not None:
            callback(it, stage, gnorm)
    return LayoutResult(state.positions, trace, setup_ms, aff)
