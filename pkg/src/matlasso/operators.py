"""Linear measurement operators on matrix spaces.

An operator maps (optionally symmetric) d1 x d2 matrices to R^n.  Three kinds
are supported:

* ``dense-ensemble``: n explicit measurement matrices A_i, with
  forward(E)_i = <A_i, E>.
* ``gaussian-ensemble``: same representation, entries drawn i.i.d. N(0, 1/n)
  from a seed so that E||forward(E)||^2 = ||E||_F^2.
* ``rank-one-perturbed-identity``: the implicit map whose normal operator is
  E -> E - coeff * <Ghat, E> * Ghat for a unit-Frobenius direction Ghat and a
  coefficient in [0, 1).  No n x (d1*d2) matrix is ever materialized.

Symmetric-domain operators act on S_d and work internally in the isometric
svec coordinates, so norms and inner products transfer unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "MeasurementOperator",
    "RestrictedConstants",
    "make_gaussian_ensemble",
    "make_dense_ensemble",
    "make_rank_one_perturbed",
    "make_identity",
    "restricted_constants_exact",
    "restricted_constants_estimate",
    "sym_vectorize",
    "sym_unvectorize",
    "operator_to_json",
    "operator_from_json",
]

_SQRT2 = float(np.sqrt(2.0))


def sym_vectorize(E, tol=1e-12):
    """Isometric vectorization (svec) of a symmetric matrix.

    Diagonal entries come first, then the strict upper triangle scaled by
    sqrt(2), so that ``norm(svec(E)) == norm(E, 'fro')`` and inner products
    are preserved.  Inputs asymmetric beyond ``tol`` (relative to the largest
    entry) are rejected; smaller asymmetries are symmetrized away.
    """
    E = np.asarray(E, dtype=float)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {E.shape}")
    d = E.shape[0]
    skew = float(np.max(np.abs(E - E.T))) if d > 0 else 0.0
    scale = max(1.0, float(np.max(np.abs(E)))) if E.size else 1.0
    if skew > tol * scale:
        raise ValueError(f"matrix is asymmetric beyond tolerance: max|E - E.T| = {skew:g}")
    E = 0.5 * (E + E.T)
    iu = np.triu_indices(d, k=1)
    out = np.empty(d * (d + 1) // 2)
    out[:d] = np.diag(E)
    out[d:] = _SQRT2 * E[iu]
    return out


def sym_unvectorize(v):
    """Inverse of :func:`sym_vectorize`."""
    v = np.asarray(v, dtype=float)
    # solve d(d+1)/2 = len(v) for d
    d = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if d * (d + 1) // 2 != v.size:
        raise ValueError(f"vector of length {v.size} is not a svec of any square matrix")
    E = np.zeros((d, d))
    iu = np.triu_indices(d, k=1)
    E[iu] = v[d:] / _SQRT2
    E = E + E.T
    E[np.diag_indices(d)] = v[:d]
    return E


@dataclass(frozen=True)
class RestrictedConstants:
    """Two-sided curvature constants of ||forward(.)||^2 on rank-<=k matrices.

    ``mu_k`` is the restricted strong-convexity constant and ``L_k`` the
    restricted smoothness constant.  ``exact`` distinguishes closed-form
    values from sampled bounds; for sampled bounds ``mu_k`` is an upper bound
    on the true constant and ``L_k`` a lower bound.
    """

    k: int
    mu_k: float
    L_k: float
    exact: bool
    note: str = ""

    def __post_init__(self):
        if not (-1e-12 <= self.mu_k <= self.L_k + 1e-12):
            raise ValueError(f"need 0 <= mu_k <= L_k, got mu_k={self.mu_k}, L_k={self.L_k}")

    @property
    def kappa_k(self):
        return float("inf") if self.mu_k == 0 else self.L_k / self.mu_k

    @property
    def delta_k(self):
        return (self.L_k - self.mu_k) / (self.L_k + self.mu_k)


@dataclass(frozen=True)
class MeasurementOperator:
    """Immutable linear map from matrix space to R^n.

    ``matrices`` holds the (n, d1, d2) stack for ensemble kinds.  For the
    rank-one-perturbed kind, ``direction`` is the unit-Frobenius Ghat and
    ``coefficient`` the normal-operator shrink factor in [0, 1).
    """

    kind: str
    d1: int
    d2: int
    n: int
    symmetric: bool = False
    matrices: np.ndarray | None = None
    direction: np.ndarray | None = None
    coefficient: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("dense-ensemble", "gaussian-ensemble", "rank-one-perturbed-identity"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.d1 < 1 or self.d2 < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if self.symmetric and self.d1 != self.d2:
            raise ValueError("symmetric operators require d1 == d2")

    # -- internal representations ------------------------------------------

    @cached_property
    def _design(self):
        """(n, dim) matrix of the ensemble in domain coordinates."""
        if self.matrices is None:
            return None
        if self.symmetric:
            rows = [sym_vectorize(A) for A in self.matrices]
            return np.asarray(rows)
        return self.matrices.reshape(self.n, self.d1 * self.d2)

    @property
    def domain_dim(self):
        if self.symmetric:
            return self.d1 * (self.d1 + 1) // 2
        return self.d1 * self.d2

    @property
    def _shrink_t(self):
        # forward = I - t * Ghat <Ghat, .>  reproduces normal = I - (2t - t^2) ...
        return 1.0 - np.sqrt(1.0 - self.coefficient)

    def _to_coords(self, E):
        return sym_vectorize(E) if self.symmetric else np.ravel(E)

    def _from_coords(self, v):
        return sym_unvectorize(v) if self.symmetric else np.reshape(v, (self.d1, self.d2))

    def _check_domain(self, E):
        E = np.asarray(E, dtype=float)
        if E.shape != (self.d1, self.d2):
            raise ValueError(f"expected a {self.d1}x{self.d2} matrix, got shape {E.shape}")
        return E

    # -- actions ------------------------------------------------------------

    def forward(self, E):
        """Apply the operator: returns the measurement vector in R^n."""
        E = self._check_domain(E)
        if self.kind == "rank-one-perturbed-identity":
            out = E
            if self.coefficient > 0.0:
                out = E - self._shrink_t * float(np.tensordot(self.direction, E)) * self.direction
            return self._to_coords(out)
        return self._design @ self._to_coords(E)

    def adjoint(self, y):
        """Apply the adjoint map R^n -> matrix space."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise ValueError(f"expected a measurement vector of length {self.n}, got shape {y.shape}")
        if self.kind == "rank-one-perturbed-identity":
            Y = self._from_coords(y)
            if self.coefficient > 0.0:
                Y = Y - self._shrink_t * float(np.tensordot(self.direction, Y)) * self.direction
            return Y
        return self._from_coords(self._design.T @ y)

    def normal(self, E):
        """Apply adjoint(forward(E)); exact closed form for the implicit kind."""
        E = self._check_domain(E)
        if self.kind == "rank-one-perturbed-identity":
            if self.coefficient == 0.0:
                return E.copy()
            return E - self.coefficient * float(np.tensordot(self.direction, E)) * self.direction
        return self.adjoint(self.forward(E))


def make_gaussian_ensemble(d1, d2, n, seed, symmetric=False):
    """Seeded Gaussian measurement ensemble with entry variance 1/n.

    The scaling makes E||forward(E)||^2 = ||E||_F^2 for every fixed E.  With
    ``symmetric=True`` (requires d1 == d2) the matrices are symmetrized, which
    preserves that normalization on the symmetric domain.
    """
    if d1 < 1 or d2 < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    if symmetric and d1 != d2:
        raise ValueError("symmetric ensembles require d1 == d2")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d1, d2)) / np.sqrt(n)
    if symmetric:
        A = 0.5 * (A + np.transpose(A, (0, 2, 1)))
    return MeasurementOperator(
        kind="gaussian-ensemble", d1=d1, d2=d2, n=n, symmetric=symmetric, matrices=A, seed=seed
    )


def make_dense_ensemble(matrices, symmetric=False):
    """Operator from an explicit (n, d1, d2) stack of measurement matrices."""
    A = np.asarray(matrices, dtype=float)
    if A.ndim != 3:
        raise ValueError(f"expected an (n, d1, d2) stack, got shape {A.shape}")
    n, d1, d2 = A.shape
    if symmetric:
        if d1 != d2:
            raise ValueError("symmetric ensembles require d1 == d2")
        A = 0.5 * (A + np.transpose(A, (0, 2, 1)))
    return MeasurementOperator(kind="dense-ensemble", d1=d1, d2=d2, n=n, symmetric=symmetric, matrices=A)


def make_rank_one_perturbed(G, coefficient=None, symmetric=False):
    """Implicit operator with normal action E -> E - coeff * <Ghat,E> * Ghat.

    With ``coefficient=None`` the direction's own norm sets the shrink:
    coeff = ||G||_F^2, i.e. normal(E) = E - <G, E> G exactly, which requires
    0 < ||G||_F < 1 so the quadratic form stays positive definite.  An
    explicit ``coefficient`` in [0, 1) uses the normalized direction instead.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise ValueError(f"direction must be a matrix, got shape {G.shape}")
    d1, d2 = G.shape
    norm = float(np.linalg.norm(G))
    if coefficient is None:
        if not 0.0 < norm < 1.0:
            raise ValueError(
                f"||G||_F = {norm:g} outside (0, 1): the residual quadratic form "
                "would not be positive definite"
            )
        coefficient = norm**2
    else:
        coefficient = float(coefficient)
        if not 0.0 <= coefficient < 1.0:
            raise ValueError(f"coefficient {coefficient:g} outside [0, 1)")
        if norm == 0.0 and coefficient > 0.0:
            raise ValueError("nonzero coefficient requires a nonzero direction")
    if symmetric:
        if d1 != d2:
            raise ValueError("symmetric operators require a square direction")
        if norm > 0 and np.max(np.abs(G - G.T)) > 1e-12 * max(1.0, np.max(np.abs(G))):
            raise ValueError("symmetric operators require a symmetric direction")
        n = d1 * (d1 + 1) // 2
    else:
        n = d1 * d2
    ghat = G / norm if norm > 0 else None
    return MeasurementOperator(
        kind="rank-one-perturbed-identity",
        d1=d1,
        d2=d2,
        n=n,
        symmetric=symmetric,
        direction=ghat,
        coefficient=coefficient,
    )


def make_identity(d1, d2=None, symmetric=False):
    """The identity measurement map (a rank-one perturbation with coefficient 0)."""
    if d2 is None:
        d2 = d1
    if symmetric and d1 != d2:
        raise ValueError("symmetric operators require d1 == d2")
    n = d1 * (d1 + 1) // 2 if symmetric else d1 * d2
    return MeasurementOperator(
        kind="rank-one-perturbed-identity", d1=d1, d2=d2, n=n, symmetric=symmetric, coefficient=0.0
    )


def restricted_constants_exact(op, k):
    """Closed-form restricted constants of a rank-one-perturbed operator.

    L_k = 1 exactly; mu_k = 1 - coeff * (s_1^2 + ... + s_k^2) where s_i are
    the singular values of the unit direction.  ``k`` beyond min(d1, d2) is
    clamped (the spectrum has run out) with a note in the result.
    """
    if op.kind != "rank-one-perturbed-identity":
        raise ValueError("exact restricted constants are only available for rank-one-perturbed operators")
    if k < 1:
        raise ValueError("k must be >= 1")
    kmax = min(op.d1, op.d2)
    note = ""
    if k > kmax:
        note = f"k={k} clamped to min(d1, d2)={kmax}"
        k_eff = kmax
    else:
        k_eff = k
    if op.coefficient == 0.0:
        return RestrictedConstants(k=k, mu_k=1.0, L_k=1.0, exact=True, note=note)
    s = np.linalg.svd(op.direction, compute_uv=False)
    mu = 1.0 - op.coefficient * float(np.sum(s[:k_eff] ** 2))
    return RestrictedConstants(k=k, mu_k=mu, L_k=1.0, exact=True, note=note)


def _random_low_rank(rng, d1, d2, k, symmetric):
    if symmetric:
        B = rng.standard_normal((d1, k))
        C = rng.standard_normal((k, k))
        return B @ (0.5 * (C + C.T)) @ B.T
    return rng.standard_normal((d1, k)) @ rng.standard_normal((k, d2))


def _truncate_rank(E, k, symmetric):
    if symmetric:
        w, V = np.linalg.eigh(0.5 * (E + E.T))
        idx = np.argsort(np.abs(w))[::-1][:k]
        return (V[:, idx] * w[idx]) @ V[:, idx].T
    U, s, Vt = np.linalg.svd(E, full_matrices=False)
    return (U[:, :k] * s[:k]) @ Vt[:k]


def restricted_constants_estimate(op, k, trials=200, seed=0, refine_iters=50):
    """Sampled restricted constants for an arbitrary operator.

    Draws ``trials`` random rank-<=k probes, then refines the extremal probes
    with truncated power iterations on the normal operator (shifted for the
    minimum side).  The returned mu_k is an upper bound on the true constant
    and L_k a lower bound; they are estimates, not certificates.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)

    def ratio(E):
        return float(np.vdot(E, op.normal(E)) / np.vdot(E, E))

    best_min = best_max = None
    mu = np.inf
    L = -np.inf
    for _ in range(trials):
        E = _random_low_rank(rng, op.d1, op.d2, k, op.symmetric)
        q = ratio(E)
        if q < mu:
            mu, best_min = q, E
        if q > L:
            L, best_max = q, E

    # max side: plain truncated power iteration on the (PSD) normal operator
    E = best_max
    for _ in range(refine_iters):
        E = _truncate_rank(op.normal(E), k, op.symmetric)
        nrm = np.linalg.norm(E)
        if nrm == 0:
            break
        E = E / nrm
    if np.linalg.norm(E) > 0:
        L = max(L, ratio(E))

    # min side: power iteration on shift*I - normal
    shift = 1.01 * max(L, 1.0)
    E = best_min
    for _ in range(refine_iters):
        E = _truncate_rank(shift * E - op.normal(E), k, op.symmetric)
        nrm = np.linalg.norm(E)
        if nrm == 0:
            break
        E = E / nrm
    if np.linalg.norm(E) > 0:
        mu = min(mu, ratio(E))

    return RestrictedConstants(
        k=k,
        mu_k=mu,
        L_k=L,
        exact=False,
        note=f"sampled from {trials} probes + {refine_iters} refinement steps; "
        "mu_k is an upper bound, L_k a lower bound",
    )


def operator_to_json(op):
    """Self-describing JSON document (plain lists, row-major) for replay."""
    doc = {
        "schema": 1,
        "kind": op.kind,
        "shape": {"d1": op.d1, "d2": op.d2, "n": op.n},
        "symmetric": op.symmetric,
    }
    if op.seed is not None:
        doc["seed"] = op.seed
    if op.kind == "rank-one-perturbed-identity":
        doc["payload"] = {
            "coefficient": op.coefficient,
            "direction": None if op.direction is None else op.direction.tolist(),
        }
    else:
        doc["payload"] = {"matrices": op.matrices.tolist()}
    return doc


def operator_from_json(doc):
    if doc.get("schema") != 1:
        raise ValueError(f"unsupported operator schema {doc.get('schema')!r}")
    kind = doc["kind"]
    shape = doc["shape"]
    symmetric = bool(doc.get("symmetric", False))
    if kind == "rank-one-perturbed-identity":
        payload = doc["payload"]
        direction = payload.get("direction")
        return MeasurementOperator(
            kind=kind,
            d1=shape["d1"],
            d2=shape["d2"],
            n=shape["n"],
            symmetric=symmetric,
            direction=None if direction is None else np.asarray(direction, dtype=float),
            coefficient=float(payload["coefficient"]),
        )
    matrices = np.asarray(doc["payload"]["matrices"], dtype=float)
    return MeasurementOperator(
        kind=kind,
        d1=shape["d1"],
        d2=shape["d2"],
        n=shape["n"],
        symmetric=symmetric,
        matrices=matrices,
        seed=doc.get("seed"),
    )
