"""Scikit-learn style estimators wrapping the solvers.

``FactoredMatrixLasso`` fits the nonconvex factored objective;
``ConvexMatrixLasso`` fits the convex baseline by proximal gradient.  Both
accept either a :class:`~matlasso.operators.MeasurementOperator` or a raw
(n, d1, d2) stack of measurement matrices as ``X`` and the observation vector
as ``y``, and both expose the recovered matrix as ``M_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_measurements, check_observations
from .objective import ProblemInstance
from .solvers import SolverConfig, multistart, solve_convex_prox, solve_factored

__all__ = ["FactoredMatrixLasso", "ConvexMatrixLasso"]


class FactoredMatrixLasso(BaseEstimator):
    """Low-rank matrix recovery via the factored nuclear-norm objective.

    Parameters
    ----------
    rank : int
        Search rank of the factorization.
    lam : float
        Regularization weight.
    symmetric : bool
        Solve over symmetric PSD matrices (M = U U.T) instead of M = U V.T.
    method : str
        "tr-newton-cg" or "gd".
    n_starts : int
        Number of independent random restarts; the best objective wins.
    """

    def __init__(
        self,
        rank=1,
        lam=0.0,
        symmetric=False,
        method="tr-newton-cg",
        max_iters=500,
        grad_tol=1e-9,
        init_scale=1.0,
        n_starts=1,
        seed=0,
    ):
        self.rank = rank
        self.lam = lam
        self.symmetric = symmetric
        self.method = method
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.init_scale = init_scale
        self.n_starts = n_starts
        self.seed = seed

    def _config(self):
        return SolverConfig(
            method=self.method,
            max_iters=self.max_iters,
            grad_tol=self.grad_tol,
            seed=self.seed,
            init_scale=self.init_scale,
        )

    def fit(self, X, y):
        op = check_measurements(X, symmetric=self.symmetric)
        b = check_observations(y, op.n)
        inst = ProblemInstance(op=op, b=b, lam=self.lam, symmetric=self.symmetric)
        if self.n_starts == 1:
            result = solve_factored(inst, self.rank, self._config())
        else:
            ms = multistart(inst, self.rank, self._config(), self.n_starts)
            result = min(ms.runs, key=lambda run: run.objective)
        self.result_ = result
        self.U_ = result.point.U
        self.V_ = None if self.symmetric else result.point.V
        self.M_ = result.point.matrix()
        self.objective_ = result.objective
        self.grad_norm_ = result.grad_norm
        self.n_iter_ = result.iters
        self.converged_ = result.converged
        return self

    def predict(self, X):
        """Predicted measurements of the recovered matrix under ``X``."""
        op = check_measurements(X, symmetric=self.symmetric)
        return op.forward(self.M_)


class ConvexMatrixLasso(BaseEstimator):
    """Nuclear-norm regularized least squares by proximal gradient."""

    def __init__(self, lam=0.0, symmetric=False, max_iters=5000, rel_obj_tol=1e-10):
        self.lam = lam
        self.symmetric = symmetric
        self.max_iters = max_iters
        self.rel_obj_tol = rel_obj_tol

    def fit(self, X, y):
        op = check_measurements(X, symmetric=self.symmetric)
        b = check_observations(y, op.n)
        inst = ProblemInstance(op=op, b=b, lam=self.lam, symmetric=self.symmetric)
        config = SolverConfig(method="prox-grad", max_iters=self.max_iters)
        result = solve_convex_prox(inst, config, rel_obj_tol=self.rel_obj_tol)
        self.result_ = result
        self.M_ = result.point
        self.objective_ = result.objective
        self.n_iter_ = result.iters
        self.converged_ = result.converged
        s = np.linalg.svd(self.M_, compute_uv=False)
        self.rank_ = int(np.sum(s > 1e-10 * max(s[0] if s.size else 0.0, 1e-300)))
        return self

    def predict(self, X):
        op = check_measurements(X, symmetric=self.symmetric)
        return op.forward(self.M_)
