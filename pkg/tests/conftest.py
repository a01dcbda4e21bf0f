"""Shared generators and independent oracles for the test suite."""

import numpy as np

from matlasso.objective import FactorPoint, ProblemInstance, f_value
from matlasso.operators import make_dense_ensemble, make_gaussian_ensemble, make_rank_one_perturbed


def rel_err(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def random_operator(rng, d1, d2, symmetric=False, kind=None):
    kind = kind or rng.choice(["gaussian-ensemble", "rank-one-perturbed-identity", "dense-ensemble"])
    if kind == "gaussian-ensemble":
        n = int(rng.integers(max(d1, d2), 3 * d1 * d2 // 2 + 2))
        return make_gaussian_ensemble(d1, d2, n, seed=int(rng.integers(0, 2**31)), symmetric=symmetric)
    if kind == "dense-ensemble":
        n = int(rng.integers(max(d1, d2), d1 * d2 + 1))
        A = rng.standard_normal((n, d1, d2)) / np.sqrt(n)
        return make_dense_ensemble(A, symmetric=symmetric)
    G = rng.standard_normal((d1, d2))
    if symmetric:
        G = 0.5 * (G + G.T)
    G *= rng.uniform(0.3, 0.95) / np.linalg.norm(G)
    return make_rank_one_perturbed(G, symmetric=symmetric)


def random_instance(rng, d1=None, d2=None, r=None, symmetric=None, lam=None, kind=None, with_truth=False):
    """A random problem instance plus a random evaluation point of rank r."""
    symmetric = bool(rng.integers(0, 2)) if symmetric is None else symmetric
    d1 = int(rng.integers(2, 9)) if d1 is None else d1
    d2 = d1 if symmetric else (int(rng.integers(2, 9)) if d2 is None else d2)
    r = int(rng.integers(1, min(d1, d2) + 1)) if r is None else r
    lam = float(rng.choice([0.0, rng.uniform(0.01, 0.5)])) if lam is None else lam
    op = random_operator(rng, d1, d2, symmetric=symmetric, kind=kind)
    truth = None
    if with_truth:
        r_star = int(rng.integers(1, r + 1))
        if symmetric:
            B = rng.standard_normal((d1, r_star))
            M_star = B @ B.T
        else:
            M_star = rng.standard_normal((d1, r_star)) @ rng.standard_normal((r_star, d2))
        xi = rng.standard_normal(op.n) * 0.1
        b = op.forward(M_star) + xi
        truth = (M_star, xi)
    else:
        b = rng.standard_normal(op.n)
    inst = ProblemInstance(op=op, b=b, lam=lam, symmetric=symmetric, truth=truth)
    if symmetric:
        P = FactorPoint(U=rng.standard_normal((d1, r)), symmetric=True)
    else:
        P = FactorPoint(U=rng.standard_normal((d1, r)), V=rng.standard_normal((d2, r)))
    return inst, P


def random_direction(rng, P):
    if P.symmetric:
        return FactorPoint(U=rng.standard_normal(P.U.shape), symmetric=True)
    return FactorPoint(U=rng.standard_normal(P.U.shape), V=rng.standard_normal(P.V.shape))


def fd_directional_gradient(inst, P, D, h=1e-5):
    """Central-difference directional derivative of the factored objective."""
    x = P.flatten()
    d = D.flatten()
    return (f_value(inst, P.like(x + h * d)) - f_value(inst, P.like(x - h * d))) / (2 * h)


def fd_quadform(inst, P, D, h=1e-4):
    """Second central difference of the factored objective along D."""
    x = P.flatten()
    d = D.flatten()
    fp = f_value(inst, P.like(x + h * d))
    fm = f_value(inst, P.like(x - h * d))
    f0 = f_value(inst, P)
    return (fp - 2 * f0 + fm) / (h * h)
