import numpy as np
import pytest

from fspdcov.pd_baselines import (
    AdmmConfig,
    BarrierConfig,
    eig_constraint_estimator,
    logdet_barrier_estimator,
    penalized_objective,
)

from util_matrices import random_pd, random_symmetric


def eigen_clamp(s, eps):
    w, v = np.linalg.eigh(s)
    m = (v * np.maximum(w, eps)) @ v.T
    return (m + m.T) / 2.0


def projected_subgradient_reference(s, lam, eps, iters=120_000):
    """Slow generic reference for the eigenvalue-constrained program.

    Projected subgradient with the strongly-convex step schedule 1/(k+1);
    tracks the best feasible objective seen.
    """
    sigma = eigen_clamp(s, eps)
    best = penalized_objective(sigma, s, lam)
    off = ~np.eye(s.shape[0], dtype=bool)
    for k in range(iters):
        g = 2.0 * (sigma - s)
        g[off] += lam * np.sign(sigma[off])
        sigma = eigen_clamp(sigma - g / (k + 1.0), eps)
        obj = penalized_objective(sigma, s, lam)
        if obj < best:
            best = obj
    return best


class TestEigConstraint:
    def test_lambda0_pd_input_is_fixed_point(self):
        rng = np.random.default_rng(0)
        s = random_pd(rng, 6, eig_low=0.5)
        res = eig_constraint_estimator(s, AdmmConfig(lam=0.0, epsilon=0.01))
        assert res.converged
        assert np.max(np.abs(res.matrix - s)) <= 1e-6

    def test_lambda0_is_eigen_clamp(self):
        s = np.array([[2.0, 3.0], [3.0, 2.0]])
        res = eig_constraint_estimator(s, AdmmConfig(lam=0.0, epsilon=0.01))
        w, v = np.linalg.eigh(s)
        expected = (v * np.array([0.01, 5.0])) @ v.T
        assert res.converged
        assert np.max(np.abs(res.matrix - expected)) <= 1e-6

    def test_matches_projected_subgradient_reference(self):
        rng = np.random.default_rng(1)
        s = random_symmetric(rng, 4, scale=1.0)
        np.fill_diagonal(s, np.abs(np.diag(s)) + 0.5)
        lam, eps = 0.3, 0.01
        res = eig_constraint_estimator(s, AdmmConfig(lam=lam, epsilon=eps))
        assert res.converged
        ref = projected_subgradient_reference(s, lam, eps)
        assert res.objective <= ref + 1e-4
        assert abs(res.objective - ref) <= 1e-4 * max(1.0, abs(ref))

    def test_pd_floor_and_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            p = int(rng.integers(4, 30))
            s = random_symmetric(rng, p)
            np.fill_diagonal(s, np.abs(np.diag(s)) + 0.3)
            res = eig_constraint_estimator(s, AdmmConfig(lam=0.2, epsilon=0.01))
            assert np.array_equal(res.matrix, res.matrix.T)
            assert res.min_eigenvalue >= 0.01 - 1e-6
            assert np.linalg.eigvalsh(res.matrix)[0] >= 0.01 - 1e-6

    def test_residuals_below_tolerance_at_convergence(self):
        rng = np.random.default_rng(3)
        s = random_symmetric(rng, 8)
        np.fill_diagonal(s, np.abs(np.diag(s)) + 0.5)
        cfg = AdmmConfig(lam=0.15, epsilon=0.01)
        res = eig_constraint_estimator(s, cfg)
        assert res.converged
        scale = max(1.0, float(np.linalg.norm(res.matrix)))
        assert res.primal_residual <= cfg.rel_tol * scale
        assert res.dual_residual <= cfg.rel_tol * scale * 10  # dual scale uses rho*||u||

    def test_nonconvergence_flagged_not_raised(self):
        rng = np.random.default_rng(4)
        s = random_symmetric(rng, 6)
        np.fill_diagonal(s, np.abs(np.diag(s)) + 0.5)
        res = eig_constraint_estimator(s, AdmmConfig(lam=0.3, epsilon=0.01, max_iter=1))
        assert not res.converged
        assert res.matrix.shape == (6, 6)


class TestLogDetBarrier:
    def test_identity_scalar_stationarity(self):
        # with lam=0 and S=I the solution is c*I where 2(c-1) = tau/c;
        # solve that independently by bisection and against the closed form
        tau = 0.01
        lo, hi = 1.0, 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if 2.0 * (mid - 1.0) - tau / mid < 0:
                lo = mid
            else:
                hi = mid
        c_bisect = 0.5 * (lo + hi)
        c_closed = 0.5 * (1.0 + np.sqrt(1.0 + 2.0 * tau))
        assert c_bisect == pytest.approx(c_closed, abs=1e-12)
        assert c_closed == pytest.approx(1.0049752469, abs=1e-9)

        res = logdet_barrier_estimator(np.eye(5), BarrierConfig(lam=0.0, tau=tau))
        assert res.converged
        assert np.max(np.abs(res.matrix - c_closed * np.eye(5))) <= 1e-6

    def test_vanishing_barrier_recovers_pd_input(self):
        rng = np.random.default_rng(5)
        s = random_pd(rng, 5, eig_low=0.4)
        res = logdet_barrier_estimator(s, BarrierConfig(lam=0.0, tau=1e-8))
        assert np.max(np.abs(res.matrix - s)) <= 1e-6

    def test_strictly_pd_output(self):
        rng = np.random.default_rng(6)
        s = random_symmetric(rng, 10)
        np.fill_diagonal(s, np.abs(np.diag(s)) + 0.4)
        res = logdet_barrier_estimator(s, BarrierConfig(lam=0.2, tau=0.01))
        assert res.converged
        assert res.min_eigenvalue > 0.0
        assert np.array_equal(res.matrix, res.matrix.T)

    def test_perturbation_oracle_and_admm_cross_check(self):
        rng = np.random.default_rng(7)
        s = random_symmetric(rng, 4)
        np.fill_diagonal(s, np.abs(np.diag(s)) + 0.5)
        lam, tau = 0.3, 0.01

        def barrier_objective(m):
            sign, logdet = np.linalg.slogdet(m)
            if sign <= 0:
                return np.inf
            return penalized_objective(m, s, lam) - tau * logdet

        res = logdet_barrier_estimator(s, BarrierConfig(lam=lam, tau=tau))
        assert res.converged
        base = barrier_objective(res.matrix)

        admm = eig_constraint_estimator(s, AdmmConfig(lam=lam, epsilon=0.01))
        assert base <= barrier_objective(admm.matrix) + 1e-9

        for _ in range(1000):
            d = random_symmetric(rng, 4, scale=rng.uniform(1e-5, 1e-2))
            assert barrier_objective(res.matrix + d) >= base - 1e-9

    def test_nonconvergence_flagged(self):
        rng = np.random.default_rng(8)
        s = random_symmetric(rng, 5)
        np.fill_diagonal(s, np.abs(np.diag(s)) + 0.4)
        res = logdet_barrier_estimator(s, BarrierConfig(lam=0.1, tau=0.01, max_iter=1))
        assert not res.converged
