"""Closed-form recovery thresholds and error bounds.

All quantities are parametrized by the search rank r, the target rank
r_star <= r, and the restricted curvature constants (mu, L) at rank r + r_star
together with the rank-2 smoothness constant L2 <= L.

The effective strong-convexity constant has both a closed form and an
independent min-max oracle: the oracle minimizes, over the feasible (alpha,
beta) region cut out by the singular-value inequality, the exactly-maximized
inner objective in the rescaling weights (t1, t2).  The two must agree; the
oracle approaches the closed form from above as the grid refines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TheoryParams",
    "BoundResult",
    "MinMaxResult",
    "critical_rip_constant",
    "critical_condition_number",
    "effective_strong_convexity",
    "effective_strong_convexity_minmax",
    "recovery_error_bound",
    "rip_recovery_error_bound",
    "shrinkage_error_identity",
    "rip_to_curvature",
    "curvature_to_rip",
]


@dataclass(frozen=True)
class TheoryParams:
    """Inputs of the rank-(r + r_star) recovery analysis.

    ``noise_opnorm`` is the operator norm of the loss gradient at the target
    matrix (equal to ||adjoint(xi)||_op for the quadratic loss).
    """

    r: int
    r_star: int
    mu: float
    L: float
    L2: float
    lam: float = 0.0
    noise_opnorm: float = 0.0

    def __post_init__(self):
        if not self.r >= self.r_star >= 1:
            raise ValueError(f"need r >= r_star >= 1, got r={self.r}, r_star={self.r_star}")
        if not 0.0 <= self.mu <= self.L:
            raise ValueError(f"need 0 <= mu <= L, got mu={self.mu}, L={self.L}")
        if not 0.0 <= self.L2 <= self.L:
            raise ValueError(f"need 0 <= L2 <= L, got L2={self.L2}, L={self.L}")
        if self.L <= 0.0:
            raise ValueError("L must be positive")
        if self.lam < 0.0 or self.noise_opnorm < 0.0:
            raise ValueError("lam and noise_opnorm must be >= 0")

    @property
    def rho(self):
        """sqrt(r / r_star) >= 1."""
        return math.sqrt(self.r / self.r_star)


@dataclass(frozen=True)
class BoundResult:
    """An error bound together with its hypothesis-feasibility flag.

    ``value`` is +inf when the hypothesis fails; callers must branch on
    ``feasible`` rather than compare against a sentinel.
    """

    value: float
    feasible: bool
    detail: str = ""


@dataclass(frozen=True)
class MinMaxResult:
    value: float
    alpha: float
    beta: float
    t1: float


def critical_rip_constant(r, r_star):
    """The sharp RIP threshold 1 / (1 + sqrt(r_star / r))."""
    if not r >= r_star >= 1:
        raise ValueError(f"need r >= r_star >= 1, got r={r}, r_star={r_star}")
    return 1.0 / (1.0 + math.sqrt(r_star / r))


def critical_condition_number(r, r_star):
    """The sharp restricted condition-number threshold 1 + 2 sqrt(r / r_star)."""
    if not r >= r_star >= 1:
        raise ValueError(f"need r >= r_star >= 1, got r={r}, r_star={r_star}")
    return 1.0 + 2.0 * math.sqrt(r / r_star)


def _mu_threshold(params):
    # feasibility boundary for mu at fixed (rho, L, L2)
    return params.L2 / (2.0 * params.rho + params.L2 / params.L)


def effective_strong_convexity(params):
    """Closed-form effective strong convexity with its feasibility flag.

    Returns a :class:`BoundResult` whose value is
    0.5 * (sqrt((L + mu)^2 + (r_star/r) L2^2) - sqrt(r_star/r) L2 - (L - mu)).
    The flag reports whether mu clears the threshold L2 / (2 rho + L2/L),
    which is exactly where the value crosses zero.
    """
    rho_inv = 1.0 / params.rho
    value = 0.5 * (
        math.sqrt((params.L + params.mu) ** 2 + (rho_inv * params.L2) ** 2)
        - rho_inv * params.L2
        - (params.L - params.mu)
    )
    feasible = params.mu > _mu_threshold(params)
    return BoundResult(value=value, feasible=feasible, detail="closed form")


def _inner_max(alpha, beta, a_coef, lbar):
    """Exact inner maximum over t1 >= t2 >= 0 with (1-a^2) t1^2 + a^2 t2^2 = 1.

    ``a_coef`` is (1 + mu/L)/2 and ``lbar`` is L2/L (both already divided by
    L).  Follows the exact case split: for lbar*beta above a_coef*alpha, the
    maximizer drops t2 to zero; otherwise the unconstrained arc maximum is
    feasible and has the closed two-term Pythagorean value.
    """
    if alpha <= 0.0:
        return a_coef
    if alpha >= 1.0:
        return a_coef
    s = lbar * beta
    cap = a_coef * alpha
    if s >= cap:
        return a_coef * math.sqrt(1.0 - alpha * alpha)
    return math.sqrt((a_coef * math.sqrt(1.0 - alpha * alpha)) ** 2 + (cap - s) ** 2)


def _beta_upper(alpha, rho):
    """Largest feasible beta at the given alpha.

    Feasibility is alpha^2 + rho^2 beta^2 <= 1 + (beta - alpha)_+^2; the set
    of feasible beta is an interval [0, beta_up].  Returns +inf when the
    constraint never binds (rho == 1, alpha == 0).
    """
    # branch beta <= alpha: alpha^2 + rho^2 beta^2 <= 1
    if alpha * alpha >= 1.0:
        return 0.0
    b1 = math.sqrt((1.0 - alpha * alpha)) / rho
    if b1 <= alpha:
        return b1
    # branch beta > alpha: (rho^2 - 1) beta^2 + 2 alpha beta <= 1 - alpha^2 + ... expand
    # g(beta) = alpha^2 - 1 + (rho^2 - 1) beta^2 + 2 alpha beta, increasing in beta
    a2 = rho * rho - 1.0
    if a2 <= 0.0:
        if alpha == 0.0:
            return math.inf
        return (1.0 - alpha * alpha) / (2.0 * alpha)
    disc = alpha * alpha + a2 * (1.0 - alpha * alpha)
    return (-alpha + math.sqrt(disc)) / a2


def effective_strong_convexity_minmax(params, grid_n=2000):
    """Grid oracle for the effective strong convexity.

    For each of ``grid_n`` alpha values in [0, 1], beta is sampled at
    ``grid_n`` points spanning the exact feasible interval (endpoint
    included, capped where the inner maximum saturates), and the exact inner
    maximum is evaluated.  Every sampled value upper-bounds the true minimum,
    so the oracle converges to the closed form from above.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be >= 100")
    L = params.L
    a_coef = 0.5 * (1.0 + params.mu / L)
    lbar = params.L2 / L
    rho = params.rho
    offset = 0.5 * (1.0 - params.mu / L)

    if lbar == 0.0:
        # objective is independent of beta; any feasible point attains mu
        return MinMaxResult(value=params.mu, alpha=0.0, beta=0.0, t1=1.0)

    best = math.inf
    best_ab = (0.0, 0.0)
    alphas = np.linspace(0.0, 1.0, grid_n)
    for alpha in alphas:
        b_up = _beta_upper(float(alpha), rho)
        # beyond the saturation point the inner max is constant in beta
        b_sat = a_coef * float(alpha) / lbar
        b_hi = min(b_up, b_sat) if math.isfinite(b_up) else b_sat
        betas = np.linspace(0.0, b_hi, grid_n) if b_hi > 0 else np.array([0.0])
        if 0.0 < alpha < 1.0:
            root = a_coef * math.sqrt(1.0 - float(alpha) ** 2)
            caps = a_coef * float(alpha) - lbar * betas
            vals = np.where(caps <= 0.0, root, np.sqrt(root**2 + np.maximum(caps, 0.0) ** 2))
        else:
            vals = np.full(betas.shape, a_coef)
        m = float(np.min(vals))
        if m < best:
            best = m
            best_ab = (float(alpha), float(betas[int(np.argmin(vals))]))
    value = L * (best - offset)
    t1 = (1.0 + params.mu / L) / (2.0 * best)
    return MinMaxResult(value=value, alpha=best_ab[0], beta=best_ab[1], t1=t1)


def recovery_error_bound(params):
    """Error bound for certified second-order points at search rank r.

    Value: (6 sqrt(r_star) lam + sqrt(r + r_star) (noise - lam)_+) / mu_eff,
    infeasible (infinite) when the effective strong convexity is <= 0.
    """
    eff = effective_strong_convexity(params)
    if not eff.feasible or eff.value <= 0.0:
        return BoundResult(value=math.inf, feasible=False, detail="effective strong convexity <= 0")
    num = 6.0 * math.sqrt(params.r_star) * params.lam + math.sqrt(params.r + params.r_star) * max(
        params.noise_opnorm - params.lam, 0.0
    )
    return BoundResult(value=num / eff.value, feasible=True, detail=f"mu_eff={eff.value:.6g}")


def rip_recovery_error_bound(r, r_star, delta_k, lam, noise_opnorm):
    """RIP form of the error bound, with denominator delta_crit - delta_k.

    Internally cross-checks the chain mu_eff >= delta_crit - delta_k with the
    curvature translation mu = 1 - delta, L = L2 = 1 + delta.
    """
    if not 0.0 <= delta_k < 1.0:
        raise ValueError(f"delta_k must be in [0, 1), got {delta_k}")
    dcrit = critical_rip_constant(r, r_star)
    if delta_k >= dcrit:
        return BoundResult(value=math.inf, feasible=False, detail=f"delta_k >= delta_crit = {dcrit:.6g}")
    mu, L = rip_to_curvature(delta_k)
    eff = effective_strong_convexity(
        TheoryParams(r=r, r_star=r_star, mu=mu, L=L, L2=L, lam=lam, noise_opnorm=noise_opnorm)
    )
    margin = dcrit - delta_k
    if eff.value < margin - 1e-12:
        raise AssertionError(
            f"curvature chain violated: mu_eff = {eff.value:.12g} < delta_crit - delta_k = {margin:.12g}"
        )
    num = 6.0 * math.sqrt(r_star) * lam + math.sqrt(r + r_star) * max(noise_opnorm - lam, 0.0)
    return BoundResult(value=num / margin, feasible=True, detail=f"delta_crit={dcrit:.6g}")


def shrinkage_error_identity(r, r_star, lam, noise_opnorm):
    """Exact recovery error of the soft-thresholded identity-operator instance.

    For the instance whose observation is a rank-r matrix at operator-norm
    distance ``noise_opnorm`` from the rank-r_star target (orthogonal row and
    column spaces, flat spectra), the unique convex solution errs by exactly
    sqrt(r_star + (1 - lam/noise)_+^2 r) * noise.  Returns (exact, floor)
    where floor is the (1/sqrt(2)) (sqrt(r_star) lam + sqrt(r + r_star)
    (noise - lam)_+) chain value; exact >= floor always.
    """
    if not r >= r_star >= 1:
        raise ValueError(f"need r >= r_star >= 1, got r={r}, r_star={r_star}")
    if not 0.0 <= lam <= noise_opnorm:
        raise ValueError(f"need 0 <= lam <= noise_opnorm, got lam={lam}, noise={noise_opnorm}")
    if noise_opnorm == 0.0:
        return 0.0, 0.0
    shrink = max(1.0 - lam / noise_opnorm, 0.0)
    exact = math.sqrt(r_star + shrink**2 * r) * noise_opnorm
    floor = (
        math.sqrt(r_star) * lam + math.sqrt(r + r_star) * max(noise_opnorm - lam, 0.0)
    ) / math.sqrt(2.0)
    if exact < floor - 1e-12 * max(1.0, exact):
        raise AssertionError(f"exact error {exact:.12g} fell below its floor {floor:.12g}")
    return exact, floor


def rip_to_curvature(delta):
    """(mu, L) = (1 - delta, 1 + delta)."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    return 1.0 - delta, 1.0 + delta


def curvature_to_rip(mu, L):
    """delta = (L - mu) / (L + mu)."""
    if not 0.0 <= mu <= L or L <= 0.0:
        raise ValueError(f"need 0 <= mu <= L with L > 0, got mu={mu}, L={L}")
    return (L - mu) / (L + mu)
