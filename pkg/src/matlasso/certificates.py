"""Second-order criticality and convex global-optimality certificates.

``certify_point`` measures the gradient norm and the smallest eigenvalue of
the factored Hessian over the full tangent space (dense eigendecomposition
for small tangent dimensions, matrix-free Lanczos otherwise) and issues a
verdict.  ``certify_convex_global`` tests the exact first-order optimality
conditions of the convex problem: nuclear-norm subgradient membership in the
asymmetric case, complementary slackness plus dual feasibility over the PSD
cone in the symmetric case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .objective import FactorPoint, f_grad, f_hvp_operator, phi_grad

__all__ = [
    "CertificationError",
    "CriticalityCertificate",
    "SingularValueDiagnostics",
    "GlobalOptCertificate",
    "certify_point",
    "assemble_hessian",
    "singular_value_inequality",
    "certify_convex_global",
    "error_vs_truth",
]

DENSE_TANGENT_LIMIT = 2000


class CertificationError(RuntimeError):
    """Raised when a certificate cannot be decided (never a silent pass)."""


@dataclass(frozen=True)
class CriticalityCertificate:
    grad_norm: float
    hess_min_eig: float
    grad_tol: float
    eig_tol: float
    verdict: str  # second-order-critical | first-order-only | non-critical
    method: str  # dense-eig | iterative-lanczos

    def to_json(self):
        return {
            "schema": 1,
            "grad_norm": self.grad_norm,
            "hess_min_eig": self.hess_min_eig,
            "grad_tol": self.grad_tol,
            "eig_tol": self.eig_tol,
            "verdict": self.verdict,
            "method": self.method,
        }


@dataclass(frozen=True)
class SingularValueDiagnostics:
    """The tangent-complement mass / smallest-factor-direction diagnostics.

    ``alpha`` is the fraction of the error mass outside the point's tangent
    space; ``beta`` couples the smallest product singular value with the
    nuclear-to-Frobenius ratio of that outside part.  The combination
    alpha^2 + (r / r_star) beta^2 <= 1 + (beta - alpha)_+^2 holds for every
    valid input; a violation indicates a bug, not a borderline case.
    """

    alpha: float
    beta: float
    r: int
    r_star: int
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class GlobalOptCertificate:
    mode: str  # asymmetric | symmetric
    residuals: dict
    tol: float
    verdict: bool

    def to_json(self):
        return {
            "schema": 1,
            "mode": self.mode,
            "residuals": dict(self.residuals),
            "tol": self.tol,
            "verdict": bool(self.verdict),
        }


def _smoothness_bound(op):
    """An inexpensive upper-bound proxy for the operator's smoothness."""
    if op.kind == "rank-one-perturbed-identity":
        return 1.0
    s = np.linalg.svd(op._design, compute_uv=False)
    return float(s[0] ** 2)


def assemble_hessian(inst, P):
    """Dense factored Hessian over the full tangent space, via HVP columns."""
    hvp = f_hvp_operator(inst, P)
    dim = P.flatten().size
    H = np.empty((dim, dim))
    basis = np.zeros(dim)
    for j in range(dim):
        basis[j] = 1.0
        H[:, j] = hvp(P.like(basis)).flatten()
        basis[j] = 0.0
    return 0.5 * (H + H.T)


def certify_point(inst, P, grad_tol=None, eig_tol=None, dense_limit=DENSE_TANGENT_LIMIT):
    """Second-order criticality certificate at a factored point.

    Default tolerances are scale-aware absolute floors:
    grad_tol = 1e-8 (1 + ||b||), eig_tol = 1e-8 (1 + L_est).
    """
    if grad_tol is None:
        grad_tol = 1e-8 * (1.0 + float(np.linalg.norm(inst.b)))
    if eig_tol is None:
        eig_tol = 1e-8 * (1.0 + _smoothness_bound(inst.op))
    grad_norm = f_grad(inst, P).norm()
    dim = P.flatten().size
    if dim <= dense_limit:
        H = assemble_hessian(inst, P)
        min_eig = float(np.linalg.eigvalsh(H)[0])
        method = "dense-eig"
    else:
        # Lanczos via spectral flip: the smallest eigenvalue of H is the
        # largest of shift*I - H, which converges far faster than asking
        # ARPACK for the algebraically smallest directly.
        hvp = f_hvp_operator(inst, P)
        linop = spla.LinearOperator(
            (dim, dim), matvec=lambda v: hvp(P.like(v)).flatten(), dtype=float
        )
        ncv = min(dim, 60)
        try:
            lam_max = float(spla.eigsh(linop, k=1, which="LA", tol=1e-6, ncv=ncv)[0][0])
            shift = 1.01 * abs(lam_max) + 1.0
            flipped = spla.LinearOperator(
                (dim, dim), matvec=lambda v: shift * v - linop.matvec(v), dtype=float
            )
            top = float(spla.eigsh(flipped, k=1, which="LA", tol=1e-8, ncv=ncv)[0][0])
        except spla.ArpackNoConvergence as exc:
            raise CertificationError(
                "Lanczos did not converge: smallest Hessian eigenvalue is indeterminate"
            ) from exc
        min_eig = shift - top
        method = "iterative-lanczos"
    if grad_norm <= grad_tol:
        verdict = "second-order-critical" if min_eig >= -eig_tol else "first-order-only"
    else:
        verdict = "non-critical"
    return CriticalityCertificate(
        grad_norm=grad_norm,
        hess_min_eig=min_eig,
        grad_tol=grad_tol,
        eig_tol=eig_tol,
        verdict=verdict,
        method=method,
    )


def _range_projector(A, rtol=1e-12):
    """Orthogonal projector onto range(A)."""
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], A.shape[0]))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    keep = s > rtol * (s[0] if s.size and s[0] > 0 else 1.0)
    Uk = U[:, keep]
    return Uk @ Uk.T


def singular_value_inequality(P, M_star, r_star=None):
    """Diagnostics of the tangent-splitting inequality at a factored point.

    ``M_perp`` is the target's component outside the point's tangent space.
    Requires H = M - M_star != 0.  ``r_star`` defaults to the numerical rank
    of the target.
    """
    M_star = np.asarray(M_star, dtype=float)
    M = P.matrix()
    H = M - M_star
    H_norm = float(np.linalg.norm(H))
    if H_norm == 0.0:
        raise ValueError("degenerate: H = 0 (point reproduces the target exactly)")
    if r_star is None:
        s_star = np.linalg.svd(M_star, compute_uv=False)
        r_star = int(np.sum(s_star > 1e-10 * max(s_star[0] if s_star.size else 0.0, 1e-300)))
        r_star = max(r_star, 1)
    r = P.r
    PU = _range_projector(P.U)
    PV = PU if P.symmetric else _range_projector(P.V)
    d1, d2 = M_star.shape
    M_perp = (np.eye(d1) - PU) @ M_star @ (np.eye(d2) - PV)
    perp_fro = float(np.linalg.norm(M_perp))
    alpha = perp_fro / H_norm
    if perp_fro <= 1e-14 * max(1.0, float(np.linalg.norm(M_star))):
        beta = 0.0
    else:
        s_M = np.linalg.svd(M, compute_uv=False)
        sigma_r = float(s_M[r - 1]) if s_M.size >= r else 0.0
        perp_nuc = float(np.sum(np.linalg.svd(M_perp, compute_uv=False)))
        beta = (sigma_r / H_norm) * (perp_nuc / perp_fro)
    lhs = alpha**2 + (r / r_star) * beta**2
    rhs = 1.0 + max(beta - alpha, 0.0) ** 2
    holds = lhs <= rhs + 1e-10 * max(1.0, rhs)
    return SingularValueDiagnostics(
        alpha=alpha, beta=beta, r=r, r_star=r_star, lhs=lhs, rhs=rhs, holds=holds
    )


def certify_convex_global(inst, M, tol=1e-8):
    """First-order global-optimality certificate for the convex problem.

    Asymmetric mode tests -grad/lam against the exact nuclear-norm
    subgradient parametrization (tangent part equals the matrix sign;
    orthogonal part has operator norm at most 1).  Symmetric mode tests
    complementary slackness and dual feasibility over the PSD cone.  With
    lam = 0 both degenerate to a small-gradient test.
    """
    M = np.asarray(M, dtype=float)
    if inst.symmetric:
        w, V = np.linalg.eigh(0.5 * (M + M.T))
        scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        if w.min() < -tol * scale:
            raise ValueError(f"matrix is not PSD to tolerance: min eigenvalue {w.min():g}")
        M = (V * np.maximum(w, 0.0)) @ V.T
        S = phi_grad(inst, M) + inst.lam * np.eye(inst.d1)
        comp = float(np.linalg.norm(S @ M)) / (1.0 + float(np.linalg.norm(M)))
        dual = float(max(-np.linalg.eigvalsh(0.5 * (S + S.T))[0], 0.0))
        verdict = comp <= tol and dual <= tol
        return GlobalOptCertificate(
            mode="symmetric",
            residuals={"complementary_slackness": comp, "dual_infeasibility": dual},
            tol=tol,
            verdict=verdict,
        )
    G = phi_grad(inst, M)
    if inst.lam == 0.0:
        resid = float(np.linalg.norm(G))
        return GlobalOptCertificate(
            mode="asymmetric",
            residuals={"grad_norm": resid},
            tol=tol,
            verdict=resid <= tol,
        )
    W = -G / inst.lam
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > 1e-10 * (s[0] if s.size and s[0] > 0 else 1.0)
    Uk, Vk = U[:, keep], Vt[keep].T
    sign = Uk @ Vk.T
    PU = Uk @ Uk.T
    PV = Vk @ Vk.T
    d1, d2 = M.shape
    tangent = PU @ W + W @ PV - PU @ W @ PV
    tangent_resid = float(np.linalg.norm(tangent - sign))
    orth = (np.eye(d1) - PU) @ W @ (np.eye(d2) - PV)
    orth_opnorm = float(np.linalg.svd(orth, compute_uv=False)[0]) if min(orth.shape) else 0.0
    orth_resid = max(orth_opnorm - 1.0, 0.0)
    verdict = tangent_resid <= tol and orth_resid <= tol
    return GlobalOptCertificate(
        mode="asymmetric",
        residuals={"tangent_deviation": tangent_resid, "orth_opnorm_excess": orth_resid},
        tol=tol,
        verdict=verdict,
    )


def error_vs_truth(point_or_matrix, M_star):
    """Frobenius error and its ratio to ||M_star||_F."""
    M = point_or_matrix.matrix() if isinstance(point_or_matrix, FactorPoint) else np.asarray(point_or_matrix)
    M_star = np.asarray(M_star, dtype=float)
    frob = float(np.linalg.norm(M - M_star))
    denom = float(np.linalg.norm(M_star))
    rel = frob / denom if denom > 0 else math.inf if frob > 0 else 0.0
    return frob, rel
