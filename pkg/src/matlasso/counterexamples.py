"""Exact adversarial instance constructors with built-in self-verification.

All families share one construction.  Pick jointly orthonormal blocks
(P, P_perp) and (Q, Q_perp), set the direction

    G = c * P Q^T - c_perp * P_perp Q_perp^T,   ||G||_F^2 = c^2 r_star + c_perp^2 r_max = 1 - eps,

and take the rank-one-perturbed operator with normal action
E -> E - <G, E> G.  The target is M_star = P Q^T.  Observations
b = forward((1 + a) P Q^T + a_perp P_perp Q_perp^T) with (a, a_perp) solving a
2x2 system (determinant eps) make M_star the unique global optimum of the
convex problem while ||adjoint(xi)||_op = lam exactly.  The candidate
spurious point is U = P_perp R (V = Q_perp R) with R^T R = x I_r,
x = c c_perp r_star / (1 - c_perp^2 r); it is always first-order critical,
and its Hessian is PSD exactly when

    c c_perp r_star >= 1 - c^2 r_star - c_perp^2 r      (strict -> local minimum,
                                                          strictly violated -> saddle).

Families differ only in how (c, c_perp, eps, ranks, geometry) are chosen:

* ``spur-gen``: the raw parametrization, square symmetric geometry.
* ``thm5``: r_max = r, eps = mu, c^2 r_star = c_perp^2 r = (1 - mu)/2, so the
  operator has L_k = 1 and mu_k >= mu at every rank; the candidate point is
  second-order critical iff mu <= 1 / (1 + 2 sqrt(r / r_star)).
* ``thm6``: r = r_max = r2 with mu_{r1 + r_star} pinned to a requested value
  that keeps rank r1 benign while rank r2 carries a genuine local minimum.
* ``example2``: rectangular asymmetric geometry with ||G||_F = 1 - eps
  parametrized by a condition number kappa_sp (eps = 1/kappa_sp), lam = 0;
  the Hessian at the candidate point is PSD iff kappa_sp >= the critical
  condition number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .certificates import certify_convex_global, certify_point, error_vs_truth
from .objective import FactorPoint, ProblemInstance, f_grad, phi_grad
from .operators import (
    RestrictedConstants,
    make_rank_one_perturbed,
    operator_to_json,
    restricted_constants_exact,
)
from .theory import critical_condition_number

__all__ = [
    "SpurGenSpec",
    "CounterexampleInstance",
    "VerifyTolerances",
    "VerificationReport",
    "build_spur_gen",
    "build_thm5",
    "build_thm6",
    "build_example2",
    "verify_instance",
    "spurious_threshold_mu",
]

FAMILIES = ("spur-gen", "thm5", "thm6", "example2")
_FLAG_TOL = 1e-12


def spurious_threshold_mu(r, r_star):
    """Largest mu at which the matched-constants family stays second-order
    critical: 1 / (1 + 2 sqrt(r / r_star)), the reciprocal of the critical
    condition number."""
    return 1.0 / critical_condition_number(r, r_star)


@dataclass(frozen=True)
class SpurGenSpec:
    """Parameters of one adversarial instance."""

    r_star: int
    r_max: int
    d: int
    epsilon: float
    c: float
    c_perp: float
    lam: float
    r: int
    mode: str  # "sym" | "asym"
    family: str = "spur-gen"
    d1: Optional[int] = None  # rectangular families only; default d
    d2: Optional[int] = None
    kappa_sp: Optional[float] = None
    r1: Optional[int] = None
    mu_target: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.mode not in ("sym", "asym"):
            raise ValueError(f"mode must be 'sym' or 'asym', got {self.mode!r}")
        if not (self.r_max >= self.r_star >= 1):
            raise ValueError("need r_max >= r_star >= 1")
        if not (self.r_star <= self.r <= self.r_max):
            raise ValueError("search rank r must lie in [r_star, r_max]")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if not (self.c >= self.c_perp > 0.0):
            raise ValueError("need c >= c_perp > 0")
        if self.lam < 0.0:
            raise ValueError("lam must be >= 0")
        gap = abs(self.c**2 * self.r_star + self.c_perp**2 * self.r_max - (1.0 - self.epsilon))
        if gap > _FLAG_TOL:
            raise ValueError(f"norm constraint violated: |c^2 r* + c_perp^2 r_max - (1-eps)| = {gap:g}")
        da, db = self.dims
        if min(da, db) < self.r_star + self.r_max:
            raise ValueError("dimensions must be at least r_star + r_max")
        if self.family == "example2":
            if self.mode != "asym":
                raise ValueError("the example2 family is asymmetric")
            if self.lam != 0.0:
                raise ValueError("the example2 family is unregularized (lam = 0)")

    @property
    def dims(self):
        return (self.d1 or self.d, self.d2 or self.d)

    @property
    def spur_lhs(self):
        return self.c * self.c_perp * self.r_star

    @property
    def spur_rhs(self):
        return 1.0 - self.c**2 * self.r_star - self.c_perp**2 * self.r

    @property
    def spur_cond_holds(self):
        return self.spur_lhs >= self.spur_rhs - _FLAG_TOL

    @property
    def spur_cond_strict(self):
        return self.spur_lhs > self.spur_rhs + _FLAG_TOL

    @property
    def spur_cond_boundary(self):
        return abs(self.spur_lhs - self.spur_rhs) <= _FLAG_TOL

    def to_json(self):
        doc = {
            "schema": 1,
            "family": self.family,
            "mode": self.mode,
            "r_star": self.r_star,
            "r_max": self.r_max,
            "r": self.r,
            "d": self.d,
            "epsilon": self.epsilon,
            "c": self.c,
            "c_perp": self.c_perp,
            "lam": self.lam,
            "spur_lhs": self.spur_lhs,
            "spur_rhs": self.spur_rhs,
            "spur_cond_holds": self.spur_cond_holds,
            "spur_cond_strict": self.spur_cond_strict,
        }
        for key in ("d1", "d2", "kappa_sp", "r1", "mu_target"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        return doc


@dataclass(frozen=True)
class CounterexampleInstance:
    spec: SpurGenSpec
    op: object
    inst: ProblemInstance
    M_star: np.ndarray
    G: np.ndarray
    P: np.ndarray
    P_perp: np.ndarray
    Q: np.ndarray
    Q_perp: np.ndarray
    a: float
    a_perp: float
    b: np.ndarray
    x: float
    spurious_point: FactorPoint
    predicted_constants: tuple

    def to_json(self):
        doc = {
            "schema": 1,
            "spec": self.spec.to_json(),
            "operator": operator_to_json(self.op),
            "b": self.b.tolist(),
            "lam": self.spec.lam,
            "a": self.a,
            "a_perp": self.a_perp,
            "x": self.x,
            "M_star": self.M_star.tolist(),
            "spurious_U": self.spurious_point.U.tolist(),
            "spurious_V": None if self.spurious_point.symmetric else self.spurious_point.V.tolist(),
            "predicted_constants": [
                {"k": rc.k, "mu_k": rc.mu_k, "L_k": rc.L_k} for rc in self.predicted_constants
            ],
        }
        return doc


def _orthonormal_blocks(dim, r_star, r_max, rng, coordinate_basis):
    if coordinate_basis:
        B = np.eye(dim)[:, : r_star + r_max]
    else:
        A = rng.standard_normal((dim, r_star + r_max))
        B, _ = np.linalg.qr(A)
    return B[:, :r_star], B[:, r_star:]


def build_spur_gen(spec, seed=0, coordinate_basis=False, orthogonal_r_block=False):
    """Assemble the instance described by ``spec``.

    The orthonormal blocks come from a QR factorization of a seeded Gaussian
    matrix (set ``coordinate_basis`` for the debuggable axis-aligned variant).
    ``R`` defaults to sqrt(x) times the first r columns of the identity; set
    ``orthogonal_r_block`` to rotate it by a seeded orthogonal matrix.
    """
    rng = np.random.default_rng(seed)
    d1, d2 = spec.dims
    if spec.family == "example2":
        P, P_perp = _orthonormal_blocks(d1, spec.r_star, spec.r_max, rng, coordinate_basis)
        Q, Q_perp = _orthonormal_blocks(d2, spec.r_star, spec.r_max, rng, coordinate_basis)
    else:
        Q, Q_perp = _orthonormal_blocks(spec.d, spec.r_star, spec.r_max, rng, coordinate_basis)
        P, P_perp = Q, Q_perp

    G = spec.c * (P @ Q.T) - spec.c_perp * (P_perp @ Q_perp.T)
    symmetric = spec.mode == "sym"
    op = make_rank_one_perturbed(G, symmetric=symmetric)

    M_star = P @ Q.T
    s_star = np.linalg.svd(M_star, compute_uv=False)[: spec.r_star]
    if abs(s_star[0] - 1.0) > 1e-12 or abs(s_star[-1] - 1.0) > 1e-12:
        raise AssertionError("target does not have a flat unit spectrum")

    # (a, a_perp) forcing the dual certificate; the determinant equals eps
    system = np.array(
        [
            [1.0 - spec.c**2 * spec.r_star, spec.c * spec.c_perp * spec.r_max],
            [spec.c * spec.c_perp * spec.r_star, 1.0 - spec.c_perp**2 * spec.r_max],
        ]
    )
    det = float(np.linalg.det(system))
    if abs(det - spec.epsilon) > 1e-10:
        raise AssertionError(f"system determinant {det:g} != epsilon {spec.epsilon:g}")
    a, a_perp = np.linalg.solve(system, np.array([spec.lam, spec.lam]))
    if spec.lam == 0.0 and max(abs(a), abs(a_perp)) > 1e-14:
        raise AssertionError("lam = 0 must give a = a_perp = 0")

    b = op.forward((1.0 + a) * (P @ Q.T) + a_perp * (P_perp @ Q_perp.T))
    xi = b - op.forward(M_star)
    inst = ProblemInstance(op=op, b=b, lam=spec.lam, symmetric=symmetric, truth=(M_star, xi))

    x = spec.spur_lhs / (1.0 - spec.c_perp**2 * spec.r)
    R = np.zeros((spec.r_max, spec.r))
    R[: spec.r, : spec.r] = np.eye(spec.r)
    if orthogonal_r_block:
        Omega, _ = np.linalg.qr(rng.standard_normal((spec.r_max, spec.r_max)))
        R = Omega[:, : spec.r]
    R = math.sqrt(x) * R
    U_sp = P_perp @ R
    if symmetric:
        spurious = FactorPoint(U=U_sp, symmetric=True)
    else:
        spurious = FactorPoint(U=U_sp, V=Q_perp @ R)

    if np.max(np.abs(U_sp.T @ M_star)) > 1e-12 or np.max(np.abs(M_star @ (Q_perp @ R))) > 1e-12:
        raise AssertionError("spurious point ranges are not orthogonal to the target")

    predicted = tuple(
        RestrictedConstants(
            k=k,
            mu_k=1.0
            - (spec.c**2 * min(k, spec.r_star) + spec.c_perp**2 * max(k - spec.r_star, 0)),
            L_k=1.0,
            exact=True,
            note="predicted",
        )
        for k in range(1, spec.r_star + spec.r_max + 1)
    )
    check = restricted_constants_exact(op, spec.r + spec.r_star)
    if abs(check.mu_k - predicted[spec.r + spec.r_star - 1].mu_k) > 1e-12:
        raise AssertionError("operator restricted constants disagree with the prediction")

    return CounterexampleInstance(
        spec=spec,
        op=op,
        inst=inst,
        M_star=M_star,
        G=G,
        P=P,
        P_perp=P_perp,
        Q=Q,
        Q_perp=Q_perp,
        a=float(a),
        a_perp=float(a_perp),
        b=b,
        x=float(x),
        spurious_point=spurious,
        predicted_constants=predicted,
    )


def build_thm5(r, r_star, mu, lam, mode="sym", d=None, seed=0, coordinate_basis=False):
    """Matched-constants family: L_k = 1 and mu_k >= mu at every rank.

    Valid for any mu in (0, 1).  The candidate point is second-order critical
    iff mu <= 1 / (1 + 2 sqrt(r / r_star)) (a local minimum when strict), and
    a strict saddle above that threshold; build succeeds on both sides so the
    verifier can certify either outcome.
    """
    if not (0.0 < mu < 1.0):
        raise ValueError("mu must lie in (0, 1)")
    if d is None:
        d = r + r_star
    c = math.sqrt((1.0 - mu) / (2.0 * r_star))
    c_perp = math.sqrt((1.0 - mu) / (2.0 * r))
    balance = abs(c * c_perp * r_star - 0.5 * (1.0 - mu) * math.sqrt(r_star / r))
    if balance > 1e-12:
        raise AssertionError("balanced coefficient identity failed")
    spec = SpurGenSpec(
        r_star=r_star,
        r_max=r,
        d=d,
        epsilon=mu,
        c=c,
        c_perp=c_perp,
        lam=lam,
        r=r,
        mode=mode,
        family="thm5",
        mu_target=mu,
    )
    return build_spur_gen(spec, seed=seed, coordinate_basis=coordinate_basis)


def build_thm6(r1, r_star, mu, lam, mode="sym", seed=0, coordinate_basis=False):
    """Overparametrization pathology: benign at rank r1, spurious at rank r2.

    Chooses r2 = ceil((r_star mu + r1) / (1 - mu)) and searches eps downward
    from mu/2 (halving) until the spurious condition holds strictly.  The
    built operator has mu_{r1 + r_star} equal to the requested mu exactly.
    """
    if not (0.0 < mu < 1.0):
        raise ValueError("mu must lie in (0, 1)")
    if not r1 >= r_star >= 1:
        raise ValueError("need r1 >= r_star >= 1")
    r2 = int(math.ceil((r_star * mu + r1) / (1.0 - mu) - 1e-9))
    eps = mu / 2.0
    for _ in range(200):
        c_perp_sq = (mu - eps) / (r2 - r1)
        c_sq = (1.0 - mu - c_perp_sq * r1) / r_star
        if c_sq > 0.0 and math.sqrt(c_sq * c_perp_sq) * r_star > eps + 1e-9:
            break
        eps *= 0.5
    else:
        raise AssertionError("no eps found with a strictly spurious candidate point")
    c = math.sqrt(c_sq)
    c_perp = math.sqrt(c_perp_sq)
    if c < c_perp:
        raise AssertionError("coefficient ordering c >= c_perp failed; r2 too small")
    spec = SpurGenSpec(
        r_star=r_star,
        r_max=r2,
        d=r_star + r2,
        epsilon=eps,
        c=c,
        c_perp=c_perp,
        lam=lam,
        r=r2,
        mode=mode,
        family="thm6",
        r1=r1,
        mu_target=mu,
    )
    built = build_spur_gen(spec, seed=seed, coordinate_basis=coordinate_basis)
    got = restricted_constants_exact(built.op, r1 + r_star).mu_k
    if abs(got - mu) > 1e-12:
        raise AssertionError(f"mu_(r1+r_star) = {got!r} differs from requested {mu!r}")
    return built


def build_example2(r_sp, r_star, d1, d2, kappa_sp, seed=0, coordinate_basis=False):
    """Rectangular unregularized family parametrized by a condition number.

    The direction has unit Frobenius norm with singular values
    1/sqrt(2 r_star) (r_star times) and 1/sqrt(2 r_sp) (r_sp times), so the
    restricted condition number at rank r + r_star equals
    1 / (1 - (1 - 1/kappa_sp) (1 + r/r_sp) / 2) for r_star <= r <= r_sp,
    topping out at kappa_sp.  The candidate point's Hessian is PSD iff
    kappa_sp is at least the critical condition number.
    """
    if kappa_sp <= 1.0:
        raise ValueError("kappa_sp must exceed 1")
    if min(d1, d2) < r_sp + r_star:
        raise ValueError("need d1, d2 >= r_sp + r_star")
    eps = 1.0 / kappa_sp
    c = math.sqrt((1.0 - eps) / (2.0 * r_star))
    c_perp = math.sqrt((1.0 - eps) / (2.0 * r_sp))
    spec = SpurGenSpec(
        r_star=r_star,
        r_max=r_sp,
        d=max(d1, d2),
        epsilon=eps,
        c=c,
        c_perp=c_perp,
        lam=0.0,
        r=r_sp,
        mode="asym",
        family="example2",
        d1=d1,
        d2=d2,
        kappa_sp=kappa_sp,
    )
    return build_spur_gen(spec, seed=seed, coordinate_basis=coordinate_basis)


@dataclass(frozen=True)
class VerifyTolerances:
    dual_identity: float = 1e-10
    convex_global: float = 1e-8
    noise_opnorm: float = 1e-10
    grad: float = 1e-10
    hess_psd: float = 1e-8
    hess_neg: float = 1e-12
    error_slack: float = 1e-12


@dataclass
class VerificationReport:
    clauses: list  # dicts: name, passed, value, expected, detail
    passed: bool

    def to_json(self):
        return {"schema": 1, "passed": bool(self.passed), "clauses": list(self.clauses)}

    def failed_clauses(self):
        return [c["name"] for c in self.clauses if not c["passed"]]


def verify_instance(built, tols=None):
    """Run the six numeric checks an instance must satisfy.

    (i) the exact dual identity at the target (subgradient certificate for
    the rectangular family), (ii) convex global optimality of the target,
    (iii) ||adjoint(xi)||_op = lam, (iv) zero gradient at the candidate
    point, (v) Hessian verdict matching the spurious condition (PSD when it
    holds, strictly negative eigenvalue when it strictly fails), and (vi)
    error at least sqrt(r_star).  Any failure is named, never swallowed.
    """
    tols = tols or VerifyTolerances()
    spec = built.spec
    inst = built.inst
    clauses = []

    def add(name, passed, value, expected, detail=""):
        clauses.append(
            {
                "name": name,
                "passed": bool(passed),
                "value": value,
                "expected": expected,
                "detail": detail,
            }
        )

    # (i) dual identity at the target
    if spec.family == "example2":
        cert = certify_convex_global(inst, built.M_star, tol=tols.convex_global)
        add(
            "dual-certificate",
            cert.verdict,
            cert.residuals,
            f"subgradient membership residuals <= {tols.convex_global:g}",
        )
    else:
        S = phi_grad(inst, built.M_star) + spec.lam * np.eye(spec.d)
        T = spec.lam * (np.eye(spec.d) - built.Q @ built.Q.T - built.Q_perp @ built.Q_perp.T)
        resid = float(np.max(np.abs(S - T)))
        add(
            "dual-identity",
            resid <= tols.dual_identity * (1.0 + spec.lam),
            resid,
            f"max entry deviation <= {tols.dual_identity:g}",
        )

    # (ii) convex global optimality of the target
    cert = certify_convex_global(inst, built.M_star, tol=tols.convex_global)
    add(
        "convex-global",
        cert.verdict,
        cert.residuals,
        f"optimality residuals <= {tols.convex_global:g}",
    )

    # (iii) noise calibration
    xi = built.b - built.op.forward(built.M_star)
    op_norm = float(np.linalg.svd(built.op.adjoint(xi), compute_uv=False)[0])
    add(
        "noise-opnorm",
        abs(op_norm - spec.lam) <= tols.noise_opnorm,
        op_norm,
        f"= lam = {spec.lam:g} to {tols.noise_opnorm:g}",
    )

    # (iv) first-order criticality of the candidate point
    gnorm = f_grad(inst, built.spurious_point).norm()
    add("spurious-gradient", gnorm <= tols.grad, gnorm, f"<= {tols.grad:g}")

    # (v) Hessian verdict against the spurious condition
    crit = certify_point(inst, built.spurious_point)
    eig = crit.hess_min_eig
    if spec.spur_cond_holds:
        expected = f">= -{tols.hess_psd:g} (PSD)"
        if spec.spur_cond_boundary:
            expected += "; boundary case: second-order critical, minimality undetermined"
        elif spec.spur_cond_strict:
            expected += "; strict: local minimum"
        add("hessian", eig >= -tols.hess_psd, eig, expected)
    else:
        add("hessian", eig < -tols.hess_neg, eig, f"< -{tols.hess_neg:g} (saddle)")

    # (vi) the candidate point is far from the target
    err, _ = error_vs_truth(built.spurious_point, built.M_star)
    floor = math.sqrt(spec.r_star)
    add("error-floor", err >= floor - tols.error_slack, err, f">= sqrt(r_star) = {floor:g}")

    return VerificationReport(clauses=clauses, passed=all(c["passed"] for c in clauses))
