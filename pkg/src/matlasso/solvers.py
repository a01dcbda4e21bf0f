"""Local solvers: gradient descent, trust-region Newton-CG, proximal gradient.

``solve_factored`` minimizes the factored objective from a random (or given)
initialization; ``solve_convex_prox`` minimizes the convex baseline by
proximal gradient with singular-value soft thresholding.  Accepted steps
never increase the objective, and every run is a pure function of
(instance, config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .objective import (
    FactorPoint,
    convex_value,
    f_grad,
    f_value,
    nuclear_norm,
    phi_grad,
    phi_hess_apply,
    phi_value,
    svd_soft_threshold,
)

__all__ = [
    "SolverConfig",
    "SolveResult",
    "MultistartResult",
    "SolverError",
    "solve_factored",
    "solve_convex_prox",
    "multistart",
]


class SolverError(RuntimeError):
    """Raised when a solve cannot continue (e.g. non-finite objective)."""


@dataclass(frozen=True)
class SolverConfig:
    method: str = "tr-newton-cg"  # tr-newton-cg | gd | prox-grad
    max_iters: int = 500
    grad_tol: float = 1e-9  # relative: stop when ||g|| <= grad_tol * max(1, ||g0||)
    tr_initial_radius: float = 1.0
    tr_max_radius: float = 1e3
    backtracking_shrink: float = 0.5
    backtracking_c1: float = 1e-4
    seed: int = 0
    init_scale: float = 1.0
    keep_trace: bool = True

    def __post_init__(self):
        if self.method not in ("tr-newton-cg", "gd", "prox-grad"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("grad_tol", "tr_initial_radius", "tr_max_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolveResult:
    point: object  # FactorPoint for factored solves, matrix for prox-grad
    objective: float
    grad_norm: float
    iters: int
    converged: bool
    trace: list = field(default_factory=list)  # rows (iter, objective, grad_norm, tr_radius)
    diagnostics: dict = field(default_factory=dict)


@dataclass
class MultistartResult:
    runs: list
    best_objective: float
    frac_at_best: float
    objective_clusters: list  # (representative objective, count), ascending
    errors: Optional[list] = None  # per-run ||M - M_star||_F when truth is known


def _random_init(inst, r, config):
    rng = np.random.default_rng(config.seed)
    scale = config.init_scale / math.sqrt(max(inst.d1, inst.d2))
    U = scale * rng.standard_normal((inst.d1, r))
    if inst.symmetric:
        return FactorPoint(U=U, symmetric=True)
    V = scale * rng.standard_normal((inst.d2, r))
    return FactorPoint(U=U, V=V)


def _check_finite(value, context):
    if not np.isfinite(value):
        raise SolverError(f"non-finite objective encountered during {context}: {value!r}")


def _flat_ops(inst, proto):
    """value/gradient/HVP closures on flat vectors.

    Same formulas as the objective module, but operating on reshaped views so
    the solver's inner loops skip point-object construction entirely.
    """
    d1, d2, lam = inst.d1, inst.d2, inst.lam
    r = proto.r
    if proto.symmetric:

        def value(x):
            U = x.reshape(d1, r)
            return phi_value(inst, U @ U.T) + lam * float(x @ x)

        def grad(x):
            U = x.reshape(d1, r)
            G = phi_grad(inst, U @ U.T)
            return (2.0 * (G @ U + lam * U)).ravel()

        def hvp_at(x):
            U = x.reshape(d1, r)
            M = U @ U.T
            G = phi_grad(inst, M)

            def hvp(v):
                D = v.reshape(d1, r)
                X = U @ D.T + D @ U.T
                NX = phi_hess_apply(inst, M, X)
                return (2.0 * (G @ D + lam * D + NX @ U)).ravel()

            return hvp

        return value, grad, hvp_at

    nu = d1 * r

    def value(x):
        U = x[:nu].reshape(d1, r)
        V = x[nu:].reshape(d2, r)
        return phi_value(inst, U @ V.T) + 0.5 * lam * float(x @ x)

    def grad(x):
        U = x[:nu].reshape(d1, r)
        V = x[nu:].reshape(d2, r)
        G = phi_grad(inst, U @ V.T)
        return np.concatenate([(G @ V + lam * U).ravel(), (G.T @ U + lam * V).ravel()])

    def hvp_at(x):
        U = x[:nu].reshape(d1, r)
        V = x[nu:].reshape(d2, r)
        M = U @ V.T
        G = phi_grad(inst, M)

        def hvp(v):
            DU = v[:nu].reshape(d1, r)
            DV = v[nu:].reshape(d2, r)
            X = U @ DV.T + DU @ V.T
            NX = phi_hess_apply(inst, M, X)
            return np.concatenate(
                [(G @ DV + lam * DU + NX @ V).ravel(), (G.T @ DU + lam * DV + NX.T @ U).ravel()]
            )

        return hvp

    return value, grad, hvp_at


_CG_ITER_CAP = 200


def _steihaug_cg(g, hvp, radius):
    """Steihaug-Toint CG for the trust-region subproblem.

    Returns (step, model_decrease).  Terminates at negative curvature or the
    boundary; interior termination uses the standard superlinear forcing
    sequence, with an iteration cap against near-singular tail grinding (any
    truncated iterate still dominates the Cauchy-point decrease).
    """
    n = g.size
    p = np.zeros(n)
    r = g.copy()
    d = -r
    rr = float(r @ r)
    gnorm = math.sqrt(rr)
    if gnorm == 0.0:
        return p, 0.0
    forcing = min(0.5, math.sqrt(gnorm)) * gnorm

    def to_boundary(p, d):
        # largest tau >= 0 with ||p + tau d|| = radius
        dd = float(d @ d)
        pd = float(p @ d)
        pp = float(p @ p)
        disc = pd * pd + dd * (radius * radius - pp)
        return (-pd + math.sqrt(max(disc, 0.0))) / dd

    Hp = np.zeros(n)
    for _ in range(min(2 * n, _CG_ITER_CAP)):
        Hd = hvp(d)
        dHd = float(d @ Hd)
        if dHd <= 0.0:
            tau = to_boundary(p, d)
            p = p + tau * d
            Hp = Hp + tau * Hd
            break
        alpha = rr / dHd
        if np.linalg.norm(p + alpha * d) >= radius:
            tau = to_boundary(p, d)
            p = p + tau * d
            Hp = Hp + tau * Hd
            break
        p = p + alpha * d
        Hp = Hp + alpha * Hd
        r = r + alpha * Hd
        rr_new = float(r @ r)
        if math.sqrt(rr_new) <= forcing:
            break
        d = -r + (rr_new / rr) * d
        rr = rr_new
    model_dec = -(float(g @ p) + 0.5 * float(p @ Hp))
    return p, model_dec


def _cauchy_decrease(g, hvp, radius):
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        return 0.0
    gHg = float(g @ hvp(g))
    if gHg <= 0.0:
        t = radius / gnorm
    else:
        t = min(gnorm * gnorm / gHg, radius / gnorm)
    return t * gnorm * gnorm - 0.5 * t * t * gHg


def _solve_tr_newton_cg(inst, P0, config):
    value, grad, hvp_at = _flat_ops(inst, P0)
    x = P0.flatten()
    fx = value(x)
    _check_finite(fx, "initialization")
    g = grad(x)
    g0_norm = float(np.linalg.norm(g))
    tol = config.grad_tol * max(1.0, g0_norm)
    radius = config.tr_initial_radius
    trace = [(0, fx, g0_norm, radius)]
    model_decs, cauchy_decs = [], []
    converged = g0_norm <= tol
    it = 0
    while not converged and it < config.max_iters:
        it += 1
        hvp = hvp_at(x)
        sub_radius = radius
        step, model_dec = _steihaug_cg(g, hvp, sub_radius)
        if model_dec <= 0.0:
            # zero-gradient subproblem; nothing to do
            converged = True
            break
        x_new = x + step
        f_new = value(x_new)
        _check_finite(f_new, f"iteration {it}")
        rho = (fx - f_new) / model_dec
        step_norm = float(np.linalg.norm(step))
        if rho < 0.25:
            radius = 0.25 * radius
        elif rho > 0.75 and step_norm >= 0.99 * sub_radius:
            radius = min(2.0 * radius, config.tr_max_radius)
        if rho > 1e-4:
            model_decs.append(model_dec)
            cauchy_decs.append(_cauchy_decrease(g, hvp, sub_radius))
            x = x_new
            fx = f_new
            g = grad(x)
            gnorm = float(np.linalg.norm(g))
            if config.keep_trace:
                trace.append((it, fx, gnorm, radius))
            converged = gnorm <= tol
        if radius < 1e-16:
            break
    gnorm = float(np.linalg.norm(g))
    return SolveResult(
        point=P0.like(x),
        objective=fx,
        grad_norm=gnorm,
        iters=it,
        converged=bool(gnorm <= tol),
        trace=trace if config.keep_trace else [],
        diagnostics={"model_decreases": model_decs, "cauchy_decreases": cauchy_decs},
    )


def _solve_gd(inst, P0, config):
    value, grad, _ = _flat_ops(inst, P0)
    x = P0.flatten()
    fx = value(x)
    _check_finite(fx, "initialization")
    g = grad(x)
    g0_norm = float(np.linalg.norm(g))
    tol = config.grad_tol * max(1.0, g0_norm)
    trace = [(0, fx, g0_norm, 0.0)]
    step = 1.0
    converged = g0_norm <= tol
    it = 0
    while not converged and it < config.max_iters:
        it += 1
        gnorm2 = float(g @ g)
        while True:
            x_new = x - step * g
            f_new = value(x_new)
            _check_finite(f_new, f"iteration {it}")
            if f_new <= fx - config.backtracking_c1 * step * gnorm2:
                break
            step *= config.backtracking_shrink
            if step < 1e-20:
                raise SolverError("backtracking stalled: no descent step found")
        x = x_new
        fx = f_new
        g = grad(x)
        gnorm = float(np.linalg.norm(g))
        if config.keep_trace:
            trace.append((it, fx, gnorm, step))
        converged = gnorm <= tol
        step = min(step * 2.0, 1e6)
    gnorm = float(np.linalg.norm(g))
    return SolveResult(
        point=P0.like(x),
        objective=fx,
        grad_norm=gnorm,
        iters=it,
        converged=bool(gnorm <= tol),
        trace=trace if config.keep_trace else [],
    )


def solve_factored(inst, r, config, init=None):
    """Minimize the factored objective at search rank r.

    Initialization is entrywise ``init_scale * N(0, 1) / sqrt(max(d1, d2))``
    from the config seed unless an explicit ``init`` point is given.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if config.method == "prox-grad":
        raise ValueError("prox-grad solves the convex problem; use solve_convex_prox")
    P0 = _random_init(inst, r, config) if init is None else init
    if P0.symmetric != inst.symmetric:
        raise ValueError("initial point and instance symmetry flags disagree")
    if config.method == "tr-newton-cg":
        return _solve_tr_newton_cg(inst, P0, config)
    return _solve_gd(inst, P0, config)


def _prox_step(inst, Z, lam_step):
    if inst.symmetric:
        # prox over the PSD cone: eigenvalue shrink, negatives clipped
        w, V = np.linalg.eigh(0.5 * (Z + Z.T))
        w = np.maximum(w - lam_step, 0.0)
        return (V * w) @ V.T
    return svd_soft_threshold(Z, lam_step)


def solve_convex_prox(inst, config=None, M0=None, rel_obj_tol=1e-10, fp_tol=1e-8):
    """Proximal gradient for the convex objective.

    Step sizes backtrack against the quadratic upper bound; the prox is the
    singular-value soft threshold (eigenvalue shrink over the PSD cone in
    symmetric mode).  Stops when the relative objective decrease falls below
    ``rel_obj_tol``.
    """
    config = config or SolverConfig(method="prox-grad", max_iters=5000)
    M = np.zeros((inst.d1, inst.d2)) if M0 is None else np.asarray(M0, dtype=float).copy()
    F = convex_value(inst, M)
    _check_finite(F, "initialization")
    step = 1.0
    trace = [(0, F, 0.0, step)]
    converged = False
    it = 0
    while it < config.max_iters:
        it += 1
        G = phi_grad(inst, M)
        base = phi_value(inst, M)
        while True:
            M_new = _prox_step(inst, M - step * G, step * inst.lam)
            diff = M_new - M
            quad_ub = base + float(np.tensordot(G, diff)) + float(np.sum(diff * diff)) / (2 * step)
            phi_new = phi_value(inst, M_new)
            if phi_new <= quad_ub + 1e-12 * max(1.0, abs(phi_new)):
                break
            step *= 0.5
            if step < 1e-20:
                raise SolverError("prox-grad backtracking stalled")
        F_new = phi_new + inst.lam * nuclear_norm(M_new)
        _check_finite(F_new, f"iteration {it}")
        # the accepted step magnitude is the prox fixed-point residual at M
        resid = float(np.linalg.norm(diff))
        obj_stalled = F - F_new <= rel_obj_tol * max(1.0, abs(F))
        M = M_new
        if config.keep_trace:
            trace.append((it, F_new, resid, step))
        F = min(F, F_new)
        if obj_stalled and resid <= fp_tol * (1.0 + float(np.linalg.norm(M))):
            converged = True
            break
        step = min(step * 1.2, 1e6)
    fp_resid = float(np.linalg.norm(M - _prox_step(inst, M - step * phi_grad(inst, M), step * inst.lam)))
    return SolveResult(
        point=M,
        objective=F,
        grad_norm=fp_resid,
        iters=it,
        converged=converged,
        trace=trace if config.keep_trace else [],
        diagnostics={"final_step": step},
    )


def multistart(inst, r, config, n_starts, warm_start=None, warm_scale=1e-3):
    """Independent solves from seeds seed .. seed + n_starts - 1.

    With ``warm_start`` given, each run initializes at the warm point plus a
    seeded random perturbation of norm ``warm_scale``.  Reports the basin
    structure of the terminal objectives and per-run errors against the
    instance truth when available.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    runs = []
    for i in range(n_starts):
        cfg = replace(config, seed=config.seed + i)
        init = None
        if warm_start is not None:
            rng = np.random.default_rng(cfg.seed)
            direction = rng.standard_normal(warm_start.flatten().shape)
            direction *= warm_scale / max(np.linalg.norm(direction), 1e-300)
            init = warm_start.like(warm_start.flatten() + direction)
        runs.append(solve_factored(inst, r, cfg, init=init))
    objectives = np.array([run.objective for run in runs])
    best = float(np.min(objectives))
    tol = 1e-6 * (1.0 + abs(best))
    frac = float(np.mean(objectives <= best + tol))
    clusters = []
    for obj in np.sort(objectives):
        if clusters and obj - clusters[-1][0] <= tol:
            clusters[-1] = (clusters[-1][0], clusters[-1][1] + 1)
        else:
            clusters.append((float(obj), 1))
    errors = None
    if inst.truth is not None:
        M_star = inst.M_star
        errors = [float(np.linalg.norm(run.point.matrix() - M_star)) for run in runs]
    return MultistartResult(
        runs=runs,
        best_objective=best,
        frac_at_best=frac,
        objective_clusters=clusters,
        errors=errors,
    )
