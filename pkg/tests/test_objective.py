import numpy as np
import pytest

from matlasso.objective import (
    CustomPhi,
    FactorPoint,
    ProblemInstance,
    convex_value,
    f_grad,
    f_hess_quadform,
    f_hvp,
    f_value,
    phi_grad,
    phi_value,
    svd_soft_threshold,
)
from matlasso.operators import make_identity, make_rank_one_perturbed, restricted_constants_exact

from conftest import fd_directional_gradient, fd_quadform, random_direction, random_instance, rel_err


class TestPhi:
    def test_exact_fit_is_zero(self):
        rng = np.random.default_rng(0)
        inst, _ = random_instance(rng, with_truth=True)
        M_star, xi = inst.truth
        clean = ProblemInstance(
            op=inst.op,
            b=inst.op.forward(M_star),
            lam=0.0,
            symmetric=inst.symmetric,
            truth=(M_star, np.zeros(inst.op.n)),
        )
        assert phi_value(clean, M_star) < 1e-24
        assert np.max(np.abs(phi_grad(clean, M_star))) < 1e-12

    def test_identity_operator_grad(self):
        rng = np.random.default_rng(1)
        Mtl = rng.standard_normal((4, 5))
        op = make_identity(4, 5)
        inst = ProblemInstance(op=op, b=op.forward(Mtl), lam=0.1)
        M = rng.standard_normal((4, 5))
        assert np.max(np.abs(phi_grad(inst, M) - (M - Mtl))) < 1e-13

    def test_custom_phi_matches_builtin(self):
        rng = np.random.default_rng(2)
        inst, P = random_instance(rng, symmetric=False)
        op, b = inst.op, inst.b
        custom = CustomPhi(
            value=lambda M: 0.5 * float(np.sum((op.forward(M) - b) ** 2)),
            grad=lambda M: op.adjoint(op.forward(M) - b),
            hess_apply=lambda M, Md: op.normal(Md),
        )
        hooked = ProblemInstance(op=op, b=b, lam=inst.lam, symmetric=False, custom_phi=custom)
        assert abs(f_value(inst, P) - f_value(hooked, P)) < 1e-12
        ga, gb = f_grad(inst, P).flatten(), f_grad(hooked, P).flatten()
        assert np.max(np.abs(ga - gb)) < 1e-12


class TestProblemInstanceValidation:
    def test_inconsistent_truth_rejected(self):
        rng = np.random.default_rng(0)
        op = make_identity(3, 3)
        M_star = rng.standard_normal((3, 3))
        xi = rng.standard_normal(9)
        with pytest.raises(ValueError, match="truth inconsistent"):
            ProblemInstance(op=op, b=op.forward(M_star), lam=0.0, truth=(M_star, xi))

    def test_symmetry_flag_mismatch_rejected(self):
        op = make_identity(3, 3, symmetric=True)
        with pytest.raises(ValueError, match="symmetry"):
            ProblemInstance(op=op, b=np.zeros(op.n), lam=0.0, symmetric=False)


class TestFactoredValue:
    def test_exact_fit_zero(self):
        rng = np.random.default_rng(3)
        U = rng.standard_normal((5, 2))
        V = rng.standard_normal((6, 2))
        op = make_identity(5, 6)
        inst = ProblemInstance(op=op, b=op.forward(U @ V.T), lam=0.0)
        assert f_value(inst, FactorPoint(U=U, V=V)) < 1e-24

    def test_zero_point_value(self):
        rng = np.random.default_rng(4)
        inst, P = random_instance(rng, symmetric=False)
        zero = FactorPoint(U=np.zeros_like(P.U), V=np.zeros_like(P.V))
        expect = 0.5 * float(inst.b @ inst.b)
        assert abs(f_value(inst, zero) - expect) < 1e-12 * max(1.0, expect)

    def test_gauge_invariance_lam_zero_only(self):
        rng = np.random.default_rng(5)
        inst, P = random_instance(rng, symmetric=False, lam=0.0, r=3)
        G = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        Pg = FactorPoint(U=P.U @ G, V=P.V @ np.linalg.inv(G).T)
        assert abs(f_value(inst, P) - f_value(inst, Pg)) < 1e-10
        reg = ProblemInstance(op=inst.op, b=inst.b, lam=0.7, symmetric=False)
        assert abs(f_value(reg, P) - f_value(reg, Pg)) > 1e-6

    def test_symmetric_asymmetric_coherence(self):
        rng = np.random.default_rng(6)
        inst, P = random_instance(rng, symmetric=True)
        paired = FactorPoint(U=P.U, V=P.U.copy())
        assert abs(f_value(inst, P) - f_value(inst, paired)) < 1e-12 * max(1.0, abs(f_value(inst, P)))


class TestDerivatives:
    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            inst, P = random_instance(rng)
            for _ in range(3):
                D = random_direction(rng, P)
                analytic = float(f_grad(inst, P).flatten() @ D.flatten())
                fd = fd_directional_gradient(inst, P, D, h=1e-5)
                assert rel_err(analytic, fd) <= 1e-5

    def test_quadform_matches_second_differences(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            inst, P = random_instance(rng)
            for _ in range(3):
                D = random_direction(rng, P)
                analytic = f_hess_quadform(inst, P, D)
                fd = fd_quadform(inst, P, D, h=1e-4)
                assert rel_err(analytic, fd) <= 1e-4

    def test_hvp_matches_gradient_differences(self):
        rng = np.random.default_rng(9)
        h = 1e-5
        for _ in range(25):
            inst, P = random_instance(rng)
            D = random_direction(rng, P)
            x, d = P.flatten(), D.flatten()
            gp = f_grad(inst, P.like(x + h * d)).flatten()
            gm = f_grad(inst, P.like(x - h * d)).flatten()
            fd = (gp - gm) / (2 * h)
            analytic = f_hvp(inst, P, D).flatten()
            num = np.linalg.norm(analytic - fd)
            den = max(1.0, np.linalg.norm(analytic), np.linalg.norm(fd))
            assert num / den <= 1e-4

    def test_hvp_at_origin_block_structure(self):
        # with U = V = 0 and lam = 0 only the gradient cross-term survives
        rng = np.random.default_rng(10)
        inst, P = random_instance(rng, symmetric=False, lam=0.0)
        zero = FactorPoint(U=np.zeros_like(P.U), V=np.zeros_like(P.V))
        D = random_direction(rng, P)
        G0 = phi_grad(inst, np.zeros((inst.d1, inst.d2)))
        hv = f_hvp(inst, zero, D)
        assert np.max(np.abs(hv.U - G0 @ D.V)) < 1e-12
        assert np.max(np.abs(hv.V - G0.T @ D.U)) < 1e-12
        quad = f_hess_quadform(inst, zero, D)
        expect = 2.0 * float(np.tensordot(G0, D.U @ D.V.T))
        assert abs(quad - expect) < 1e-10 * max(1.0, abs(expect))


class TestNuclearNormAndProx:
    def test_flat_spectrum_shrinks_uniformly(self):
        rng = np.random.default_rng(11)
        P, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        Q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
        M = P @ Q.T
        lam = 0.4
        assert np.max(np.abs(svd_soft_threshold(M, lam) - (1 - lam) * M)) < 1e-12

    def test_lam_zero_is_identity(self):
        rng = np.random.default_rng(12)
        M = rng.standard_normal((4, 6))
        assert np.array_equal(svd_soft_threshold(M, 0.0), M)

    def test_large_lam_kills_matrix(self):
        rng = np.random.default_rng(13)
        M = rng.standard_normal((4, 4))
        lam = np.linalg.svd(M, compute_uv=False)[0]
        assert np.max(np.abs(svd_soft_threshold(M, lam))) < 1e-12


class TestConvexValue:
    def test_zero_matrix_value(self):
        rng = np.random.default_rng(14)
        inst, _ = random_instance(rng, symmetric=False)
        expect = 0.5 * float(inst.b @ inst.b)
        assert abs(convex_value(inst, np.zeros((inst.d1, inst.d2))) - expect) < 1e-12 * max(1.0, expect)

    def test_soft_threshold_beats_perturbations(self):
        rng = np.random.default_rng(15)
        Mtl = rng.standard_normal((5, 4))
        op = make_identity(5, 4)
        lam = 0.3
        inst = ProblemInstance(op=op, b=op.forward(Mtl), lam=lam)
        M_hat = svd_soft_threshold(Mtl, lam)
        base = convex_value(inst, M_hat)
        for _ in range(100):
            delta = rng.standard_normal((5, 4)) * rng.uniform(1e-4, 1.0)
            assert convex_value(inst, M_hat + delta) >= base - 1e-12

    def test_factored_dominates_convex(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            inst, P = random_instance(rng, symmetric=False)
            assert f_value(inst, P) >= convex_value(inst, P.U @ P.V.T) - 1e-10

    def test_equality_iff_balanced_nuclear(self):
        rng = np.random.default_rng(17)
        inst, P = random_instance(rng, symmetric=False, r=2)
        # build a balanced factorization from the SVD: equality holds
        M = P.U @ P.V.T
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        k = P.r
        Ub = U[:, :k] * np.sqrt(s[:k])
        Vb = Vt[:k].T * np.sqrt(s[:k])
        bal = FactorPoint(U=Ub, V=Vb)
        gap = f_value(inst, bal) - convex_value(inst, Ub @ Vb.T)
        assert abs(gap) < 1e-10


class TestKeyGradientInequality:
    def test_restricted_inner_product_bound(self):
        # for the quadratic loss, gradient differences against a probe inside a
        # shared k-dimensional factor span obey the two-sided curvature bound
        rng = np.random.default_rng(18)
        for _ in range(25):
            d1, d2 = int(rng.integers(5, 9)), int(rng.integers(5, 9))
            k = int(rng.integers(3, min(d1, d2) + 1))
            sub = max(k // 3, 1)
            G = rng.standard_normal((d1, d2))
            G *= rng.uniform(0.3, 0.9) / np.linalg.norm(G)
            op = make_rank_one_perturbed(G)
            inst = ProblemInstance(op=op, b=rng.standard_normal(op.n), lam=0.0)
            rc = restricted_constants_exact(op, k)
            L, mu = rc.L_k, rc.mu_k
            Uspan, _ = np.linalg.qr(rng.standard_normal((d1, k)))
            Vspan, _ = np.linalg.qr(rng.standard_normal((d2, k)))

            def draw():
                C = np.zeros((k, k))
                C[:sub, :sub] = rng.standard_normal((sub, sub))
                perm = rng.permutation(k)
                return Uspan @ C[perm][:, perm] @ Vspan.T

            M1, M2, E = draw(), draw(), draw()
            H = M2 - M1
            lhs = float(np.tensordot(phi_grad(inst, M2) - phi_grad(inst, M1), E))
            mid = 0.5 * (L + mu) * float(np.tensordot(H, E))
            bound = 0.5 * (L - mu) * np.linalg.norm(H) * np.linalg.norm(E)
            assert abs(lhs - mid) <= bound + 1e-10
