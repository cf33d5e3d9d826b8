"""Self-contained verification suites: random-instance constructions for the
collapse bounds, exactly/approximately balanced chains for the power lemma,
and the module-level property checks behind `nclab verify`.

Each check prints one pass/fail row; failures dump the inputs (always a seed)
needed to replay them.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import bounds, data, densemat, metrics, ntk
from .network import (ActivationSpec, NetworkConfig, ParamSet, act_apply,
                      check_activation_bounds, forward, gradient, loss,
                      partial_product)

SMOOTH = ActivationSpec("smoothed_leaky_relu", gamma=0.3, beta=2.0)


# ---------------------------------------------------------------------------
# constructed instances for the Theorem 1 / Lemma C.2 suites
# ---------------------------------------------------------------------------

def make_balanced_chain(seed: int, dims: list, sigma_lo: float = 0.5,
                        sigma_hi: float = 2.0) -> list:
    """Chain W_L .. W_1 (returned in forward order W_1..W_L) with exactly
    balanced interfaces, built by splitting a target SVD across the layers.

    dims = [n_0, n_1, ..., n_L]; every interior width must be >= min(n_0, n_L)
    so the shared singular spectrum fits.
    """
    rng = np.random.default_rng(seed)
    depth = len(dims) - 1
    rank = min(dims[0], dims[-1])
    if any(d < rank for d in dims):
        raise ValueError("interior widths must carry the full spectrum")
    s = np.sort(rng.uniform(sigma_lo, sigma_hi, size=rank))[::-1]
    root = s ** (1.0 / depth)

    def frame(n):
        g = rng.standard_normal((n, rank))
        q, _ = np.linalg.qr(g)
        return q[:, :rank]

    bases = [frame(d) for d in dims]
    weights = []
    for layer in range(depth):
        w = bases[layer + 1] * root @ bases[layer].T
        weights.append(w)
    return weights


def make_thm1_instance(seed: int, eps1_scale: float = 1e-3,
                       eps2_scale: float = 1e-8) -> dict:
    """A premise-satisfying linear-head state: collapsed features plus noise of
    interpolation size ~eps1, balanced head perturbed at one interface by
    ~eps2. Returns everything the bound checkers need."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    l2 = int(rng.integers(2, 4))
    n_per = int(rng.integers(2, 5))
    n = k * n_per
    width = k + int(rng.integers(0, 4))
    dims = [width] + [width] * (l2 - 1) + [k]

    y = data.one_hot(np.repeat(np.arange(k), n_per), k)
    idx = metrics.ClassIndex(tuple([n_per] * k))
    weights = make_balanced_chain(seed + 1, dims)
    cfg = NetworkConfig(input_dim=width, widths=tuple(dims[1:]), l1=0, l2=l2,
                        activation=SMOOTH)
    # collapsed head-input features interpolating exactly, then bounded noise
    prod = weights[-1]
    for w in weights[-2::-1]:
        prod = prod @ w
    x0 = densemat.pinv(prod) @ y
    noise = rng.standard_normal(x0.shape)
    noise *= eps1_scale / max(densemat.fro_norm(prod @ noise), 1e-300)
    x = x0 + noise
    # perturb one interface so eps2 is small but nonzero
    if l2 >= 2:
        j = int(rng.integers(0, l2 - 1))
        pert = rng.standard_normal(weights[j].shape)
        weights[j] = weights[j] + eps2_scale * pert / max(np.linalg.norm(pert), 1e-300)
    params = ParamSet(weights)
    return {"cfg": cfg, "params": params, "x": x, "y": y, "idx": idx,
            "seed": seed}


def check_thm1_instance(inst: dict) -> tuple:
    """Evaluate all four Theorem-1-style bounds on a constructed instance.

    Returns (ok, detail); vacuous-weak alignment bounds (RHS outside [-1, 1])
    are skipped, everything else must hold.
    """
    cfg, params, x, y, idx = (inst["cfg"], inst["params"], inst["x"],
                              inst["y"], inst["idx"])
    trace = forward(cfg, params, x)
    eps1, eps2, r = metrics.extract_thm1_inputs(cfg, trace, params, y)
    k, n = cfg.n_classes, x.shape[1]
    sK_y = densemat.svd(y).s[k - 1]
    x_op = densemat.op_norm(x)
    c3 = densemat.cond(partial_product(cfg, params, cfg.depth, cfg.l1 + 1))
    inp = bounds.Thm1Inputs(eps1=eps1, eps2=eps2, r=r,
                            n_lminus1=cfg.widths[cfg.depth - 2], k=k, n=n,
                            sK_y=sK_y, x_opnorm=x_op, l1=cfg.l1, l2=cfg.l2,
                            c3=c3)
    detail = {"seed": inst["seed"], "eps1": eps1, "eps2": eps2, "r": r}
    if not inp.eps1_premise():
        return False, {**detail, "reason": "constructed instance broke premise"}
    try:
        z_head = trace.z[cfg.depth - 1]
        nc1_val = metrics.nc1(z_head, idx)
        rhs1 = bounds.thm1_nc1_rhs(inp)
        kappa_wl = densemat.cond(params.weights[-1])
        rhs_k = bounds.thm1_kappa_rhs(inp)
        zbar, _ = metrics.class_means(z_head, idx)
        nc2_val = densemat.cond(zbar)
        rhs2 = bounds.thm1_nc2_rhs(inp, kappa_wl)
        nc3_val = metrics.nc3(z_head, params.weights[-1], idx)
        rhs3 = bounds.thm1_nc3_rhs(inp, kappa_wl)
    except (bounds.VacuousBound, ValueError) as exc:
        return False, {**detail, "reason": f"unexpectedly vacuous: {exc}"}
    detail.update(nc1=nc1_val, nc1_rhs=rhs1, kappa=kappa_wl, kappa_rhs=rhs_k,
                  nc2=nc2_val, nc2_rhs=rhs2, nc3=nc3_val, nc3_rhs=rhs3)
    ok = nc1_val <= rhs1 and kappa_wl <= rhs_k and nc2_val <= rhs2
    if -1.0 <= rhs3 <= 1.0:  # vacuous-weak alignment bounds don't count
        ok = ok and nc3_val >= rhs3
    return ok, detail


def thm1_suite(n_instances: int = 200, seed0: int = 0) -> tuple:
    for i in range(n_instances):
        ok, detail = check_thm1_instance(make_thm1_instance(seed0 + i))
        if not ok:
            return False, detail
    return True, {"instances": n_instances}


def lemma_c2_suite(n_instances: int = 100, seed0: int = 1000,
                   exact_tol: float = 1e-10) -> tuple:
    """Exactly balanced chains give a zero power gap; eps2-perturbed chains
    stay under the (L2^2/2) eps2 r^{2(L2-1)} cap."""
    rng = np.random.default_rng(seed0)
    for i in range(n_instances):
        seed = seed0 + i
        l2 = int(rng.integers(2, 5))
        k = int(rng.integers(2, 5))
        width = k + int(rng.integers(0, 4))
        dims = [width] * l2 + [k]
        weights = make_balanced_chain(seed, dims)
        cfg = NetworkConfig(input_dim=width, widths=tuple(dims[1:]), l1=0,
                            l2=l2, activation=SMOOTH)
        params = ParamSet([w.copy() for w in weights])
        r = max(densemat.op_norm(w) for w in weights)
        rep = bounds.balanced_power_gap(cfg, params, r, eps2=0.0)
        if rep.measured > exact_tol:
            return False, {"seed": seed, "exact_gap": rep.measured}
        eps2_scale = 10.0 ** rng.uniform(-8, -2)
        j = int(rng.integers(0, l2 - 1))
        pert = rng.standard_normal(weights[j].shape)
        weights[j] = weights[j] + eps2_scale * pert / np.linalg.norm(pert)
        params = ParamSet(weights)
        eps2 = max(metrics.balancedness_gap(params.weights[l], params.weights[l - 1])
                   for l in range(1, cfg.depth))
        r = max(max(densemat.op_norm(w) for w in weights), 1.0)
        rep = bounds.balanced_power_gap(cfg, params, r, eps2=eps2)
        if rep.holds != bounds.HOLDS:
            return False, {"seed": seed, "gap": rep.measured, "cap": rep.value}
    return True, {"instances": n_instances}


# ---------------------------------------------------------------------------
# module property checks
# ---------------------------------------------------------------------------

def _random_net(rng) -> tuple:
    l1 = int(rng.integers(0, 3))
    l2 = int(rng.integers(1, 3))
    d = int(rng.integers(2, 6))
    widths = tuple(int(rng.integers(2, 7)) for _ in range(l1 + l2))
    cfg = NetworkConfig(input_dim=d, widths=widths, l1=l1, l2=l2,
                        activation=SMOOTH)
    weights = [rng.standard_normal(cfg.layer_shape(layer)) / 2
               for layer in range(1, cfg.depth + 1)]
    n = int(rng.integers(2, 7))
    x = rng.standard_normal((d, n))
    y = data.one_hot(rng.integers(0, widths[-1], size=n), widths[-1])
    return cfg, ParamSet(weights), x, y


def fd_gradient(cfg, params, x, y, lam, h=1e-5) -> ParamSet:
    out = []
    for li, w in enumerate(params.weights):
        g = np.zeros_like(w)
        for flat in range(w.size):
            for sgn in (1.0, -1.0):
                p = params.copy()
                p.weights[li].flat[flat] += sgn * h
                c, _ = loss(cfg, p, x, y, lam)
                g.flat[flat] += sgn * c
        out.append(g / (2 * h))
    return ParamSet(out)


def check_svd_reconstruction(seed: int = 0, trials: int = 30) -> tuple:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(trials):
        m, n = int(rng.integers(1, 40)), int(rng.integers(1, 40))
        a = rng.standard_normal((m, n)) * 10.0 ** rng.integers(-3, 4)
        res = densemat.svd(a)
        err = densemat.fro_norm(a - res.reconstruct()) / max(1.0, densemat.fro_norm(a))
        worst = max(worst, err)
        if err > 1e-10:
            return False, {"seed": seed, "trial": i, "shape": (m, n), "err": err}
    return True, {"worst": worst}


def check_pinv_identities(seed: int = 1, trials: int = 20) -> tuple:
    rng = np.random.default_rng(seed)
    for i in range(trials):
        m, n = int(rng.integers(1, 20)), int(rng.integers(1, 20))
        a = rng.standard_normal((m, n))
        p = densemat.pinv(a)
        checks = [densemat.fro_norm(a @ p @ a - a),
                  densemat.fro_norm(p @ a @ p - p),
                  densemat.fro_norm((a @ p).T - a @ p),
                  densemat.fro_norm((p @ a).T - p @ a)]
        if max(checks) > 1e-8 * max(1.0, densemat.fro_norm(a)):
            return False, {"seed": seed, "trial": i, "residuals": checks}
    return True, {}

def check_gradient_fd(seed: int = 2, trials: int = 10) -> tuple:
    rng = np.random.default_rng(seed)
    for i in range(trials):
        cfg, params, x, y = _random_net(rng)
        lam = float(rng.uniform(0, 0.1))
        g = gradient(cfg, params, x, y, lam)
        fd = fd_gradient(cfg, params, x, y, lam)
        num = g.dist(fd)
        den = max(fd.norm(), 1e-12)
        if num / den > 1e-6:
            return False, {"seed": seed, "trial": i, "rel_err": num / den,
                           "widths": cfg.widths, "l1": cfg.l1}
    return True, {}


def check_activation(seed: int = 3) -> tuple:
    for gamma, beta in ((0.1, 1.0), (0.3, 2.0), (0.5, 5.0)):
        spec = ActivationSpec("smoothed_leaky_relu", gamma=gamma, beta=beta)
        rep = check_activation_bounds(spec)
        if not (rep["deriv_in_range"] and rep["abs_bound_ok"]
                and rep.get("deriv_lipschitz_ok", True)):
            return False, {"gamma": gamma, "beta": beta, **rep}
    return True, {}


def check_pullback_is_gradient(seed: int = 4, trials: int = 8) -> tuple:
    rng = np.random.default_rng(seed)
    for i in range(trials):
        cfg, params, x, y = _random_net(rng)
        trace = forward(cfg, params, x)
        a = trace.z[-1] - y
        g = gradient(cfg, params, x, y, 0.0)
        pb = ntk.pullback(cfg, params, trace, a)
        if g.dist(pb) > 1e-10 * max(1.0, g.norm()):
            return False, {"seed": seed, "trial": i}
    return True, {}


def check_ntk_rayleigh(seed: int = 5, trials: int = 6) -> tuple:
    rng = np.random.default_rng(seed)
    for i in range(trials):
        cfg, params, x, _ = _random_net(rng)
        rep = ntk.ntk_opnorm(cfg, params, x, seed=seed + i)
        trace = forward(cfg, params, x)
        for j in range(4):
            a = rng.standard_normal(trace.z[-1].shape)
            q = ntk.ntk_quadratic_form(cfg, params, trace, a)
            if q > rep.rho * float(np.sum(a * a)) * (1.0 + 1e-6):
                return False, {"seed": seed, "trial": i, "probe": j,
                               "quadratic_form": q, "rho": rep.rho}
    return True, {}


def check_one_hot_identities() -> tuple:
    for k in (2, 4, 10):
        n_per = 6
        y = data.one_hot(np.repeat(np.arange(k), n_per), k)
        idx = metrics.ClassIndex(tuple([n_per] * k))
        sK = densemat.svd(y).s[k - 1]
        if abs(sK - math.sqrt(n_per)) > 1e-12:
            return False, {"k": k, "sK": sK}
        zbar, mu_g = metrics.class_means(y, idx)
        dev = np.mean(np.linalg.norm(zbar - mu_g[:, None], axis=0))
        if abs(dev - math.sqrt((k - 1) / k)) > 1e-12:
            return False, {"k": k, "mean_dev": dev}
    return True, {}


def check_dense_ntk_agreement(seed: int = 6) -> tuple:
    rng = np.random.default_rng(seed)
    cfg = NetworkConfig(input_dim=3, widths=(4, 2), l1=1, l2=1,
                        activation=SMOOTH)
    weights = [rng.standard_normal(cfg.layer_shape(layer))
               for layer in range(1, 3)]
    params = ParamSet(weights)
    x = rng.standard_normal((3, 5))
    dense = ntk.dense_ntk(cfg, params, x)
    top = max(densemat.svd(dense).s)
    rep = ntk.ntk_opnorm(cfg, params, x, seed=seed)
    rel = abs(rep.rho - top) / max(top, 1e-300)
    if rel > 1e-6:
        return False, {"seed": seed, "power": rep.rho, "dense": top, "rel": rel}
    return True, {"rel": rel}


FAST_CHECKS = [
    ("svd reconstruction", check_svd_reconstruction),
    ("pinv Moore-Penrose identities", check_pinv_identities),
    ("gradient vs finite differences", check_gradient_fd),
    ("activation derivative/Lipschitz bounds", check_activation),
    ("pullback reproduces the loss gradient", check_pullback_is_gradient),
    ("NTK Rayleigh-quotient bound", check_ntk_rayleigh),
    ("balanced one-hot identities", check_one_hot_identities),
    ("dense NTK assembly agreement", check_dense_ntk_agreement),
    ("balanced-chain power lemma (20 instances)",
     lambda: lemma_c2_suite(n_instances=20)),
]

FULL_CHECKS = FAST_CHECKS + [
    ("collapse bound suite, 200 random instances", thm1_suite),
    ("balanced-chain power lemma (100 instances)",
     lambda: lemma_c2_suite(n_instances=100)),
]


def run_suite(level: str = "fast") -> bool:
    checks = FULL_CHECKS if level == "full" else FAST_CHECKS
    all_ok = True
    width = max(len(name) for name, _ in checks)
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure with the traceback cause
            ok, detail = False, {"exception": repr(exc)}
        dt = time.perf_counter() - t0
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  ({dt:.2f}s)")
        if not ok:
            print(f"  counterexample: {detail}")
            all_ok = False
    print("all checks passed" if all_ok else "verification FAILED")
    return all_ok
