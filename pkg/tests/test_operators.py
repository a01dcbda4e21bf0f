import math

import numpy as np
import pytest

from matlasso.operators import (
    make_gaussian_ensemble,
    make_identity,
    make_rank_one_perturbed,
    operator_from_json,
    operator_to_json,
    restricted_constants_estimate,
    restricted_constants_exact,
    sym_unvectorize,
    sym_vectorize,
)

from conftest import random_operator


class TestSymVectorize:
    def test_identity_norm(self):
        v = sym_vectorize(np.eye(2))
        assert v.shape == (3,)
        assert abs(np.linalg.norm(v) - math.sqrt(2)) < 1e-14

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            d = int(rng.integers(1, 9))
            A = rng.standard_normal((d, d))
            E = A + A.T
            assert np.max(np.abs(sym_unvectorize(sym_vectorize(E)) - E)) < 1e-14

    def test_inner_products_preserved(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            d = int(rng.integers(2, 8))
            E = rng.standard_normal((d, d))
            F = rng.standard_normal((d, d))
            E, F = E + E.T, F + F.T
            lhs = float(sym_vectorize(E) @ sym_vectorize(F))
            assert abs(lhs - np.tensordot(E, F)) < 1e-10 * max(1.0, abs(lhs))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="asymmetric"):
            sym_vectorize(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestAdjointConsistency:
    @pytest.mark.parametrize("symmetric", [False, True])
    @pytest.mark.parametrize("kind", ["gaussian-ensemble", "dense-ensemble", "rank-one-perturbed-identity"])
    def test_random_probes(self, kind, symmetric):
        rng = np.random.default_rng(42)
        op = random_operator(rng, 6, 6 if symmetric else 5, symmetric=symmetric, kind=kind)
        for _ in range(100):
            E = rng.standard_normal((op.d1, op.d2))
            if symmetric:
                E = 0.5 * (E + E.T)
            y = rng.standard_normal(op.n)
            lhs = float(op.forward(E) @ y)
            rhs = float(np.tensordot(op.adjoint(y), E))
            assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(E) * np.linalg.norm(y)

    def test_symmetric_adjoint_image_is_symmetric(self):
        rng = np.random.default_rng(3)
        for kind in ("gaussian-ensemble", "rank-one-perturbed-identity"):
            op = random_operator(rng, 5, 5, symmetric=True, kind=kind)
            y = rng.standard_normal(op.n)
            Y = op.adjoint(y)
            assert np.max(np.abs(Y - Y.T)) < 1e-12


class TestRankOnePerturbed:
    def test_normal_action_exact(self):
        rng = np.random.default_rng(7)
        G = rng.standard_normal((4, 5))
        G *= 0.8 / np.linalg.norm(G)
        op = make_rank_one_perturbed(G)
        ghat = G / np.linalg.norm(G)
        coeff = np.linalg.norm(G) ** 2
        for _ in range(20):
            E = rng.standard_normal((4, 5))
            expected = E - coeff * np.tensordot(ghat, E) * ghat
            assert np.max(np.abs(op.normal(E) - expected)) < 1e-14
            fwd_sq = float(op.forward(E) @ op.forward(E))
            identity = np.tensordot(E, E) - coeff * np.tensordot(ghat, E) ** 2
            assert abs(fwd_sq - identity) < 1e-12 * max(1.0, fwd_sq)

    def test_normal_of_direction_shrinks(self):
        # normal(G) = eps * G when ||G||^2 = 1 - eps
        rng = np.random.default_rng(8)
        eps = 0.3
        G = rng.standard_normal((4, 4))
        G *= math.sqrt(1 - eps) / np.linalg.norm(G)
        op = make_rank_one_perturbed(G)
        assert np.max(np.abs(op.normal(G) - eps * G)) < 1e-13

    def test_orthogonal_direction_norm_preserved(self):
        rng = np.random.default_rng(9)
        G = rng.standard_normal((5, 4))
        G *= 0.7 / np.linalg.norm(G)
        op = make_rank_one_perturbed(G)
        E = rng.standard_normal((5, 4))
        E -= np.tensordot(G, E) / np.tensordot(G, G) * G
        assert abs(np.linalg.norm(op.forward(E)) - np.linalg.norm(E)) < 1e-12

    def test_condition_number_variant(self):
        # coefficient 1 - 1/kappa with a unit direction
        rng = np.random.default_rng(10)
        kappa = 4.0
        G = rng.standard_normal((4, 4))
        G /= np.linalg.norm(G)
        op = make_rank_one_perturbed(G, coefficient=1 - 1 / kappa)
        for _ in range(10):
            E = rng.standard_normal((4, 4))
            fwd_sq = float(op.forward(E) @ op.forward(E))
            expected = np.tensordot(E, E) - (1 - 1 / kappa) * np.tensordot(G, E) ** 2
            assert abs(fwd_sq - expected) < 1e-12 * max(1.0, fwd_sq)

    def test_rejects_unit_or_larger_direction(self):
        G = np.eye(3) / math.sqrt(3)  # norm exactly 1
        with pytest.raises(ValueError, match="outside"):
            make_rank_one_perturbed(G)

    def test_identity_operator(self):
        op = make_identity(3, 4)
        rng = np.random.default_rng(11)
        E = rng.standard_normal((3, 4))
        assert np.array_equal(op.normal(E), E)
        rc = restricted_constants_exact(op, 2)
        assert rc.mu_k == rc.L_k == 1.0


class TestGaussianEnsemble:
    def test_fig_shape(self):
        n = math.ceil(2.35 * 2 * (50 + 51))
        assert n == 475
        op = make_gaussian_ensemble(50, 51, n, seed=0)
        assert op.matrices.shape == (475, 50, 51)

    def test_seed_determinism(self):
        a = make_gaussian_ensemble(6, 7, 10, seed=123)
        b = make_gaussian_ensemble(6, 7, 10, seed=123)
        assert np.array_equal(a.matrices, b.matrices)

    def test_energy_normalization(self):
        # E||forward(E)||^2 = ||E||_F^2, within 5% over 200 seeds
        rng = np.random.default_rng(12)
        E = rng.standard_normal((5, 6))
        E /= np.linalg.norm(E)
        vals = []
        for seed in range(200):
            op = make_gaussian_ensemble(5, 6, 40, seed=seed)
            y = op.forward(E)
            vals.append(float(y @ y))
        assert abs(np.mean(vals) - 1.0) < 0.05

    def test_symmetric_energy_normalization(self):
        rng = np.random.default_rng(13)
        E = rng.standard_normal((5, 5))
        E = 0.5 * (E + E.T)
        E /= np.linalg.norm(E)
        vals = []
        for seed in range(200):
            op = make_gaussian_ensemble(5, 5, 40, seed=seed, symmetric=True)
            y = op.forward(E)
            vals.append(float(y @ y))
        assert abs(np.mean(vals) - 1.0) < 0.05


class TestRestrictedConstants:
    def test_exact_monotone_profile(self):
        rng = np.random.default_rng(14)
        G = rng.standard_normal((6, 6))
        G *= 0.9 / np.linalg.norm(G)
        op = make_rank_one_perturbed(G)
        prev = restricted_constants_exact(op, 1)
        for k in range(2, 7):
            cur = restricted_constants_exact(op, k)
            assert cur.mu_k <= prev.mu_k + 1e-15
            assert cur.L_k >= prev.L_k - 1e-15
            assert cur.delta_k >= prev.delta_k - 1e-15
            prev = cur

    def test_clamps_large_k(self):
        op = make_identity(3, 3)
        rc = restricted_constants_exact(op, 10)
        assert "clamped" in rc.note

    def test_estimate_brackets_exact(self):
        rng = np.random.default_rng(15)
        for trial in range(20):
            d = int(rng.integers(3, 7))
            G = rng.standard_normal((d, d))
            G *= rng.uniform(0.4, 0.9) / np.linalg.norm(G)
            op = make_rank_one_perturbed(G)
            k = int(rng.integers(1, d))
            exact = restricted_constants_exact(op, k)
            est = restricted_constants_estimate(op, k, trials=60, seed=trial)
            assert est.mu_k >= exact.mu_k - 1e-9
            assert est.L_k <= exact.L_k + 1e-9

    def test_estimate_identity(self):
        op = make_identity(4, 4)
        est = restricted_constants_estimate(op, 2, trials=5, seed=0)
        assert abs(est.mu_k - 1.0) < 1e-12 and abs(est.L_k - 1.0) < 1e-12

    def test_estimate_interval_shrinks_on_average(self):
        rng = np.random.default_rng(16)
        G = rng.standard_normal((5, 5))
        G *= 0.8 / np.linalg.norm(G)
        op = make_rank_one_perturbed(G)
        exact = restricted_constants_exact(op, 2)

        def gap(trials, seed):
            est = restricted_constants_estimate(op, 2, trials=trials, seed=seed, refine_iters=0)
            return (est.mu_k - exact.mu_k) + (exact.L_k - est.L_k)

        small = np.mean([gap(1, s) for s in range(10)])
        large = np.mean([gap(1000, s) for s in range(10)])
        assert large <= small + 1e-12


class TestSerialization:
    @pytest.mark.parametrize("kind", ["gaussian-ensemble", "dense-ensemble", "rank-one-perturbed-identity"])
    @pytest.mark.parametrize("symmetric", [False, True])
    def test_round_trip(self, kind, symmetric):
        rng = np.random.default_rng(17)
        op = random_operator(rng, 4, 4 if symmetric else 5, symmetric=symmetric, kind=kind)
        clone = operator_from_json(operator_to_json(op))
        E = rng.standard_normal((op.d1, op.d2))
        if symmetric:
            E = 0.5 * (E + E.T)
        assert np.allclose(op.forward(E), clone.forward(E), atol=1e-15)
        assert clone.kind == op.kind and clone.n == op.n
