"""Full-batch gradient descent with weight decay, trajectory recording and the
late learning-rate drop. One run is strictly sequential and deterministic for a
fixed seed; balancedness gaps across the linear interfaces are measured at the
recording cadence only (operator norms cost an SVD each).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import densemat
from .network import NetworkConfig, ParamSet, forward, gradient, loss

DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True)
class InitSpec:
    scheme: str = "gaussian"          # gaussian | custom
    scales: tuple = ()                # per-layer stddevs (gaussian)
    matrices: tuple = ()              # explicit weights (custom)

    def __post_init__(self):
        if self.scheme not in ("gaussian", "custom"):
            raise ValueError(f"unknown init scheme {self.scheme!r}")
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if self.scheme == "gaussian" and any(s < 0 for s in self.scales):
            raise ValueError("init scales must be non-negative")


@dataclass(frozen=True)
class TrainConfig:
    eta: float
    lam: float
    steps: int
    lr_drop_fraction: float = 0.8
    lr_drop_factor: float = 10.0
    record_every: int = 1
    seed: int = 0
    init: InitSpec = InitSpec()
    store_params: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError("eta must be positive and finite")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError("lambda must be non-negative and finite")
        if self.steps < 0 or self.record_every < 1:
            raise ValueError("steps must be >= 0 and record_every >= 1")
        if not 0.0 < self.lr_drop_fraction <= 1.0:
            raise ValueError("lr_drop_fraction must lie in (0, 1]")


@dataclass
class TrajectoryRecord:
    step: int
    c_lambda: float
    c_0: float
    param_norm: float
    dist_from_init: float
    eps1: float
    balancedness_gaps: dict        # linear interface l -> ||D_l||_op
    layer_op_norms: list           # ||W_l||_op per layer
    params: ParamSet | None = None


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    diverged: bool = False
    linear_interfaces: tuple = ()

    def last(self) -> TrajectoryRecord:
        return self.records[-1]


def init_params(cfg: NetworkConfig, spec: InitSpec, seed: int) -> ParamSet:
    """I.i.d. Gaussian entries with per-layer scales; deterministic per seed."""
    if spec.scheme == "custom":
        weights = [np.array(m, dtype=np.float64) for m in spec.matrices]
        ps = ParamSet(weights)
        ps.check_shapes(cfg)
        return ps
    if spec.scales and len(spec.scales) != cfg.depth:
        raise ValueError(f"need {cfg.depth} init scales, got {len(spec.scales)}")
    rng = np.random.default_rng(seed)
    weights = []
    for layer in range(1, cfg.depth + 1):
        shape = cfg.layer_shape(layer)
        # default: variance 1/fan_in keeps pre-activation scale flat with depth
        scale = spec.scales[layer - 1] if spec.scales else 1.0 / math.sqrt(shape[1])
        weights.append(scale * rng.standard_normal(shape) if scale > 0 else np.zeros(shape))
    return ParamSet(weights)


def gd_step(cfg: NetworkConfig, params: ParamSet, x, y, eta: float, lam: float) -> ParamSet:
    """One update theta - eta * grad C_lambda(theta); the input is not mutated."""
    with np.errstate(over="ignore", invalid="ignore"):
        g = gradient(cfg, params, x, y, lam)
    for layer, gw in enumerate(g.weights, start=1):
        if not np.all(np.isfinite(gw)):
            raise FloatingPointError(f"non-finite gradient at layer {layer}")
    return ParamSet([w - eta * gw for w, gw in zip(params.weights, g.weights)])


def _record(cfg, params, theta0, x, y, lam, step, store_params) -> TrajectoryRecord:
    trace = forward(cfg, params, x)
    clam, c0 = loss(cfg, params, x, y, lam, trace=trace)
    gaps = {}
    for l in range(cfg.l1 + 1, cfg.depth):
        w, w_next = params.weights[l - 1], params.weights[l]
        gaps[l] = densemat.op_norm(w_next.T @ w_next - w @ w.T)
    return TrajectoryRecord(
        step=step,
        c_lambda=clam,
        c_0=c0,
        param_norm=params.norm(),
        dist_from_init=params.dist(theta0),
        eps1=math.sqrt(2.0 * c0),
        balancedness_gaps=gaps,
        layer_op_norms=[densemat.op_norm(w) for w in params.weights],
        params=params.copy() if store_params else None,
    )


def effective_eta(train_cfg: TrainConfig, step: int) -> float:
    """Step size at GD step `step`; drops at lr_drop_fraction of the run."""
    drop_at = math.ceil(train_cfg.lr_drop_fraction * train_cfg.steps)
    if train_cfg.lr_drop_fraction < 1.0 and step >= drop_at:
        return train_cfg.eta / train_cfg.lr_drop_factor
    return train_cfg.eta


def train(cfg: NetworkConfig, train_cfg: TrainConfig, x, y,
          params0: ParamSet | None = None) -> tuple:
    """Run GD; returns (final ParamSet, Trajectory).

    On divergence (non-finite loss or c_0 above the threshold) the partial
    trajectory is returned with `diverged` set; the last recorded state is the
    final healthy one.
    """
    params = params0.copy() if params0 is not None else init_params(
        cfg, train_cfg.init, train_cfg.seed)
    theta0 = params.copy()
    traj = Trajectory(linear_interfaces=tuple(range(cfg.l1 + 1, cfg.depth)))
    traj.records.append(_record(cfg, params, theta0, x, y, train_cfg.lam, 0,
                                train_cfg.store_params))
    last_healthy = params.copy()
    for k in range(train_cfg.steps):
        eta = effective_eta(train_cfg, k)
        try:
            params = gd_step(cfg, params, x, y, eta, train_cfg.lam)
        except FloatingPointError:
            traj.diverged = True
            break
        step = k + 1
        if step % train_cfg.record_every == 0 or step == train_cfg.steps:
            with np.errstate(over="ignore", invalid="ignore"):
                _, c0 = loss(cfg, params, x, y, train_cfg.lam)
            if not math.isfinite(c0) or c0 > DIVERGENCE_THRESHOLD:
                traj.diverged = True
                break
            traj.records.append(_record(cfg, params, theta0, x, y, train_cfg.lam,
                                        step, train_cfg.store_params))
            last_healthy = params.copy()
    return (last_healthy if traj.diverged else params), traj
