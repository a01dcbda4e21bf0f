"""Loss, factored objectives, gradients, and Hessian actions.

The convex loss is the quadratic phi(M) = 0.5 * ||forward(M) - b||^2.  The
factored objective adds the balanced Frobenius penalty:

    asymmetric:  f(U, V) = phi(U V.T) + lam * (||U||^2 + ||V||^2) / 2
    symmetric:   f(U)    = phi(U U.T) + lam * ||U||^2

Hessian-vector products are assembled term by term from the exact quadratic
forms (no autodiff), so they can be checked against finite differences.
A custom (value, grad, hess_apply) callback triple can replace the quadratic
loss; only the quadratic one ships.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "FactorPoint",
    "ProblemInstance",
    "CustomPhi",
    "phi_value",
    "phi_grad",
    "phi_hess_apply",
    "f_value",
    "f_grad",
    "f_grad_norm",
    "f_hvp",
    "f_hess_quadform",
    "nuclear_norm",
    "svd_soft_threshold",
    "convex_value",
]


@dataclass(frozen=True)
class FactorPoint:
    """A candidate factorization: (U, V) with M = U V.T, or U with M = U U.T."""

    U: np.ndarray
    V: Optional[np.ndarray] = None
    symmetric: bool = False

    def __post_init__(self):
        U = np.asarray(self.U, dtype=float)
        object.__setattr__(self, "U", U)
        if U.ndim != 2:
            raise ValueError(f"U must be a matrix, got shape {U.shape}")
        if not np.all(np.isfinite(U)):
            raise ValueError("U has non-finite entries")
        if self.symmetric:
            if self.V is not None:
                raise ValueError("symmetric points carry only U")
        else:
            if self.V is None:
                raise ValueError("asymmetric points need both U and V")
            V = np.asarray(self.V, dtype=float)
            object.__setattr__(self, "V", V)
            if V.ndim != 2 or V.shape[1] != U.shape[1]:
                raise ValueError(f"V shape {V.shape} incompatible with U shape {U.shape}")
            if not np.all(np.isfinite(V)):
                raise ValueError("V has non-finite entries")

    @property
    def r(self):
        return self.U.shape[1]

    def matrix(self):
        """The product matrix M this point represents."""
        if self.symmetric:
            return self.U @ self.U.T
        return self.U @ self.V.T

    def flatten(self):
        if self.symmetric:
            return self.U.ravel().copy()
        return np.concatenate([self.U.ravel(), self.V.ravel()])

    def like(self, vec):
        """Rebuild a point of this shape from a flat vector."""
        vec = np.asarray(vec, dtype=float)
        if self.symmetric:
            return FactorPoint(U=vec.reshape(self.U.shape), symmetric=True)
        nu = self.U.size
        return FactorPoint(U=vec[:nu].reshape(self.U.shape), V=vec[nu:].reshape(self.V.shape))

    def norm(self):
        return float(np.linalg.norm(self.flatten()))


@dataclass(frozen=True)
class CustomPhi:
    """Extension hook: a (value, grad, hess_apply) triple over matrix space."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess_apply: Callable[[np.ndarray, np.ndarray], np.ndarray]  # (M, Mdot) -> matrix


@dataclass(frozen=True)
class ProblemInstance:
    """Operator, observations, regularization, and optional ground truth."""

    op: object
    b: np.ndarray
    lam: float
    symmetric: bool = False
    truth: Optional[tuple] = None  # (M_star, xi) with b = forward(M_star) + xi
    custom_phi: Optional[CustomPhi] = None

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "b", b)
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if b.shape != (self.op.n,):
            raise ValueError(f"b has shape {b.shape}, operator expects length {self.op.n}")
        if self.symmetric != self.op.symmetric:
            raise ValueError("instance and operator symmetry flags disagree")
        if self.truth is not None:
            M_star, xi = self.truth
            M_star = np.asarray(M_star, dtype=float)
            xi = np.asarray(xi, dtype=float)
            object.__setattr__(self, "truth", (M_star, xi))
            resid = np.linalg.norm(b - self.op.forward(M_star) - xi)
            if resid > 1e-12 * max(1.0, np.linalg.norm(b)):
                raise ValueError(f"truth inconsistent with b: ||b - forward(M*) - xi|| = {resid:g}")

    @property
    def d1(self):
        return self.op.d1

    @property
    def d2(self):
        return self.op.d2

    @property
    def M_star(self):
        return None if self.truth is None else self.truth[0]

    @property
    def xi(self):
        return None if self.truth is None else self.truth[1]


def phi_value(inst, M):
    """Loss value at a matrix: 0.5 * ||forward(M) - b||^2 for the quadratic loss."""
    if inst.custom_phi is not None:
        return float(inst.custom_phi.value(M))
    resid = inst.op.forward(M) - inst.b
    return 0.5 * float(resid @ resid)


def phi_grad(inst, M):
    """Loss gradient: adjoint(forward(M) - b) for the quadratic loss."""
    if inst.custom_phi is not None:
        return inst.custom_phi.grad(M)
    return inst.op.adjoint(inst.op.forward(M) - inst.b)


def phi_hess_apply(inst, M, Mdot):
    """Hessian action of the loss; for the quadratic loss this is normal(Mdot)."""
    if inst.custom_phi is not None:
        return inst.custom_phi.hess_apply(M, Mdot)
    return inst.op.normal(Mdot)


def _check_point(inst, P):
    if P.symmetric:
        if P.U.shape[0] != inst.d1:
            raise ValueError(f"U has {P.U.shape[0]} rows, domain is {inst.d1}x{inst.d2}")
    else:
        if P.U.shape[0] != inst.d1 or P.V.shape[0] != inst.d2:
            raise ValueError(
                f"point shapes ({P.U.shape}, {P.V.shape}) incompatible with domain {inst.d1}x{inst.d2}"
            )


def f_value(inst, P):
    """Factored objective value at a point."""
    _check_point(inst, P)
    if P.symmetric:
        return phi_value(inst, P.U @ P.U.T) + inst.lam * float(np.sum(P.U**2))
    pen = 0.5 * (float(np.sum(P.U**2)) + float(np.sum(P.V**2)))
    return phi_value(inst, P.U @ P.V.T) + inst.lam * pen


def f_grad(inst, P):
    """Gradient of the factored objective, as a point-shaped object."""
    _check_point(inst, P)
    if P.symmetric:
        G = phi_grad(inst, P.U @ P.U.T)
        return FactorPoint(U=2.0 * (G @ P.U + inst.lam * P.U), symmetric=True)
    G = phi_grad(inst, P.U @ P.V.T)
    return FactorPoint(U=G @ P.V + inst.lam * P.U, V=G.T @ P.U + inst.lam * P.V)


def f_grad_norm(inst, P):
    return f_grad(inst, P).norm()


def f_hvp(inst, P, D):
    """Hessian-vector product of the factored objective at P in direction D.

    Assembled from the three exact terms of the Hessian quadratic form: the
    loss-gradient cross term, the ridge term, and the loss-curvature term on
    U Dv.T + Du V.T (respectively U Du.T + Du U.T).
    """
    _check_point(inst, P)
    if P.symmetric != D.symmetric:
        raise ValueError("point and direction must share symmetry mode")
    if P.symmetric:
        M = P.U @ P.U.T
        G = phi_grad(inst, M)
        X = P.U @ D.U.T + D.U @ P.U.T
        NX = phi_hess_apply(inst, M, X)
        return FactorPoint(U=2.0 * ((G + inst.lam * np.eye(inst.d1)) @ D.U + NX @ P.U), symmetric=True)
    M = P.U @ P.V.T
    G = phi_grad(inst, M)
    X = P.U @ D.V.T + D.U @ P.V.T
    NX = phi_hess_apply(inst, M, X)
    return FactorPoint(
        U=G @ D.V + inst.lam * D.U + NX @ P.V,
        V=G.T @ D.U + inst.lam * D.V + NX.T @ P.U,
    )


def f_hess_quadform(inst, P, D):
    """Hessian quadratic form <hvp(D), D>."""
    return float(f_hvp(inst, P, D).flatten() @ D.flatten())


def f_hvp_operator(inst, P):
    """Closure computing hvp(D) with the base point's loss gradient reused.

    Equivalent to ``f_hvp(inst, P, D)`` but amortizes the forward/adjoint work
    at P across many directions (e.g. inside a CG loop).
    """
    _check_point(inst, P)
    if P.symmetric:
        M = P.U @ P.U.T
        G = phi_grad(inst, M)
        lamI = inst.lam * np.eye(inst.d1)

        def hvp(D):
            X = P.U @ D.U.T + D.U @ P.U.T
            NX = phi_hess_apply(inst, M, X)
            return FactorPoint(U=2.0 * ((G + lamI) @ D.U + NX @ P.U), symmetric=True)

        return hvp

    M = P.U @ P.V.T
    G = phi_grad(inst, M)

    def hvp(D):
        X = P.U @ D.V.T + D.U @ P.V.T
        NX = phi_hess_apply(inst, M, X)
        return FactorPoint(
            U=G @ D.V + inst.lam * D.U + NX @ P.V,
            V=G.T @ D.U + inst.lam * D.V + NX.T @ P.U,
        )

    return hvp


def nuclear_norm(M):
    """Sum of the singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)))


def svd_soft_threshold(M, lam):
    """Shrink every singular value by lam, flooring at zero."""
    M = np.asarray(M, dtype=float)
    if lam == 0:
        return M.copy()
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (U * np.maximum(s - lam, 0.0)) @ Vt


def convex_value(inst, M):
    """The nuclear-norm regularized convex objective phi(M) + lam * ||M||_*."""
    return phi_value(inst, M) + inst.lam * nuclear_norm(M)
