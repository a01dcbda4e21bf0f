"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .operators import MeasurementOperator, make_dense_ensemble

__all__ = ["check_measurements", "check_observations"]


def check_measurements(X, symmetric=False):
    """Coerce measurement input into a :class:`MeasurementOperator`.

    Accepts an operator as-is, or an (n, d1, d2) array of measurement
    matrices (stacked as a dense ensemble).
    """
    if isinstance(X, MeasurementOperator):
        if X.symmetric != symmetric:
            raise ValueError(
                f"operator symmetry flag {X.symmetric} disagrees with requested {symmetric}"
            )
        return X
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise ValueError(
            f"expected a MeasurementOperator or an (n, d1, d2) array, got array of shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("measurement matrices contain non-finite entries")
    return make_dense_ensemble(X, symmetric=symmetric)


def check_observations(y, n):
    y = np.asarray(y, dtype=float).ravel()
    if y.shape != (n,):
        raise ValueError(f"expected {n} observations, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("observations contain non-finite entries")
    return y
