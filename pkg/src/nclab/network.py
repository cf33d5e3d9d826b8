"""Architecture, activations, forward pass, square loss and its closed-form gradient.

The network has l1 nonlinear layers followed by l2 linear layers and no bias
terms. The smoothed leaky ReLU is the Gaussian-mollified max(gamma*u, u); it is
evaluated in closed form via the standard normal pdf/cdf (the mollifying kernel
is a Gaussian of standard deviation (1-gamma)/(sqrt(2*pi)*beta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr  # standard normal CDF, vectorized

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ActivationSpec:
    kind: str  # smoothed_leaky_relu | leaky_relu | relu
    gamma: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("smoothed_leaky_relu", "leaky_relu", "relu"):
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind in ("smoothed_leaky_relu", "leaky_relu"):
            if self.gamma is None or not 0.0 < self.gamma < 1.0:
                raise ValueError("gamma must lie in (0, 1)")
        if self.kind == "smoothed_leaky_relu":
            if self.beta is None or self.beta < 1.0:
                raise ValueError("beta must be >= 1")

    @property
    def kernel_sd(self) -> float:
        """Standard deviation of the mollifying Gaussian."""
        return (1.0 - self.gamma) / (_SQRT_2PI * self.beta)

    @property
    def shift(self) -> float:
        """Additive constant of the smoothed activation."""
        return (1.0 - self.gamma) ** 2 / (2.0 * math.pi * self.beta)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def act_apply(spec: ActivationSpec, x):
    """Elementwise activation; accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    if spec.kind == "relu":
        return np.maximum(x, 0.0)
    if spec.kind == "leaky_relu":
        return np.maximum(spec.gamma * x, x)
    s = spec.kernel_sd
    u = x / s
    return spec.gamma * x + (1.0 - spec.gamma) * (x * ndtr(u) + s * _phi(u)) - spec.shift


def act_grad(spec: ActivationSpec, x):
    """Elementwise activation derivative (relu derivative at 0 is 0)."""
    x = np.asarray(x, dtype=np.float64)
    if spec.kind == "relu":
        return np.where(x > 0.0, 1.0, 0.0)
    if spec.kind == "leaky_relu":
        return np.where(x >= 0.0, 1.0, spec.gamma)
    return spec.gamma + (1.0 - spec.gamma) * ndtr(x / spec.kernel_sd)


def act_eval(spec: ActivationSpec, x: float) -> float:
    return float(act_apply(spec, x))


def act_deriv(spec: ActivationSpec, x: float) -> float:
    return float(act_grad(spec, x))


def check_activation_bounds(spec: ActivationSpec, lo: float = -50.0, hi: float = 50.0,
                            points: int = 2001) -> dict:
    """Numerical check of the derivative range, curvature cap and |sigma(x)| <= |x|.

    The |sigma(x)| <= |x| property is checked on a grid rather than assumed.
    """
    xs = np.linspace(lo, hi, points)
    d = act_grad(spec, xs)
    out = {
        "deriv_min": float(d.min()),
        "deriv_max": float(d.max()),
        "deriv_in_range": bool(d.min() >= (spec.gamma or 0.0) - 1e-12 and d.max() <= 1.0 + 1e-12),
    }
    h = xs[1] - xs[0]
    out["deriv_lipschitz_est"] = float(np.max(np.abs(np.diff(d)) / h))
    if spec.kind == "smoothed_leaky_relu":
        out["deriv_lipschitz_ok"] = bool(out["deriv_lipschitz_est"] <= spec.beta * (1 + 1e-6))
    vals = act_apply(spec, xs)
    viol = np.abs(vals) - np.abs(xs)
    out["abs_bound_max_violation"] = float(viol.max())
    out["abs_bound_ok"] = bool(viol.max() <= 1e-12)
    return out


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    widths: tuple  # n_1 .. n_L
    l1: int
    l2: int
    activation: ActivationSpec

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.l1 < 0 or self.l2 < 0 or self.l1 + self.l2 != len(self.widths):
            raise ValueError("l1 + l2 must equal the number of widths")
        if self.l1 + self.l2 == 0:
            raise ValueError("network must have at least one layer")
        if any(w <= 0 for w in self.widths) or self.input_dim <= 0:
            raise ValueError("dimensions must be positive")

    @property
    def depth(self) -> int:
        return self.l1 + self.l2

    @property
    def n_classes(self) -> int:
        return self.widths[-1]

    def layer_shape(self, layer: int) -> tuple:
        """Shape of W_layer, 1-based."""
        n_in = self.input_dim if layer == 1 else self.widths[layer - 2]
        return (self.widths[layer - 1], n_in)

    def is_pyramidal(self, n_samples: int) -> bool:
        """n1 >= N and non-increasing widths from the second layer on."""
        w = self.widths
        return w[0] >= n_samples and all(w[i] >= w[i + 1] for i in range(1, len(w) - 1))


@dataclass
class ParamSet:
    weights: list = field(default_factory=list)  # W_1 .. W_L

    def copy(self) -> "ParamSet":
        return ParamSet([w.copy() for w in self.weights])

    def norm(self) -> float:
        return math.sqrt(sum(float(np.sum(w * w)) for w in self.weights))

    def dist(self, other: "ParamSet") -> float:
        return math.sqrt(sum(float(np.sum((a - b) ** 2))
                             for a, b in zip(self.weights, other.weights)))

    def axpy(self, alpha: float, other: "ParamSet") -> "ParamSet":
        """self + alpha * other, as a new ParamSet."""
        return ParamSet([a + alpha * b for a, b in zip(self.weights, other.weights)])

    def scaled(self, alpha: float) -> "ParamSet":
        return ParamSet([alpha * w for w in self.weights])

    def check_shapes(self, cfg: NetworkConfig) -> None:
        if len(self.weights) != cfg.depth:
            raise ValueError(f"expected {cfg.depth} weight matrices, got {len(self.weights)}")
        for layer, w in enumerate(self.weights, start=1):
            if w.shape != cfg.layer_shape(layer):
                raise ValueError(
                    f"layer {layer}: weight shape {w.shape} != expected {cfg.layer_shape(layer)}")


@dataclass
class ForwardTrace:
    z: list       # Z_0 .. Z_L
    preact: list  # W_l Z_{l-1} for the l1 nonlinear layers


def forward(cfg: NetworkConfig, params: ParamSet, x: np.ndarray) -> ForwardTrace:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != cfg.input_dim:
        raise ValueError(f"input has {x.shape[0]} rows, network expects {cfg.input_dim}")
    params.check_shapes(cfg)
    z = [x]
    preact = []
    cur = x
    for layer in range(1, cfg.depth + 1):
        w = params.weights[layer - 1]
        try:
            pre = w @ cur
        except ValueError as exc:
            raise ValueError(f"shape mismatch at layer {layer}: {exc}") from exc
        if layer <= cfg.l1:
            preact.append(pre)
            cur = act_apply(cfg.activation, pre)
        else:
            cur = pre
        z.append(cur)
    return ForwardTrace(z=z, preact=preact)


def loss(cfg: NetworkConfig, params: ParamSet, x, y, lam: float = 0.0,
         trace: ForwardTrace | None = None) -> tuple:
    """Returns (c_lambda, c_0) with c_0 = 0.5*||Z_L - Y||_F^2."""
    y = np.asarray(y, dtype=np.float64)
    if trace is None:
        trace = forward(cfg, params, x)
    resid = trace.z[-1] - y
    c0 = 0.5 * float(np.sum(resid * resid))
    clam = c0 + 0.5 * lam * params.norm() ** 2
    return clam, c0


def backprop(cfg: NetworkConfig, params: ParamSet, trace: ForwardTrace,
             cotangent: np.ndarray) -> ParamSet:
    """Gradients of <cotangent, Z_L> with respect to every weight matrix."""
    grads = [None] * cfg.depth
    delta = cotangent
    for layer in range(cfg.depth, 0, -1):
        if layer <= cfg.l1:
            delta = delta * act_grad(cfg.activation, trace.preact[layer - 1])
        grads[layer - 1] = delta @ trace.z[layer - 1].T
        if layer > 1:
            delta = params.weights[layer - 1].T @ delta
    return ParamSet(grads)


def gradient(cfg: NetworkConfig, params: ParamSet, x, y, lam: float = 0.0,
             trace: ForwardTrace | None = None) -> ParamSet:
    """Gradient of the lambda-regularized square loss."""
    y = np.asarray(y, dtype=np.float64)
    if trace is None:
        trace = forward(cfg, params, x)
    g = backprop(cfg, params, trace, trace.z[-1] - y)
    if lam != 0.0:
        g = ParamSet([gw + lam * w for gw, w in zip(g.weights, params.weights)])
    return g


def partial_product(cfg: NetworkConfig, params: ParamSet, m: int, l: int) -> np.ndarray:
    """W_m ... W_l over the linear range (1-based layers, l <= m)."""
    if not (cfg.l1 + 1 <= l <= m <= cfg.depth):
        raise ValueError(
            f"partial product indices (m={m}, l={l}) outside linear range "
            f"[{cfg.l1 + 1}, {cfg.depth}]")
    out = params.weights[l - 1]
    for layer in range(l + 1, m + 1):
        out = params.weights[layer - 1] @ out
    return out
