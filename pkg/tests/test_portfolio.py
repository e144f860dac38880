import itertools
import math

import numpy as np
import pytest

from fspdcov.exceptions import ConfigurationError, NotPositiveDefiniteError
from fspdcov.portfolio import (
    BacktestSpec,
    _annualize,
    backtest,
    mvp_no_short,
    mvp_simple,
    project_simplex,
    synthetic_returns,
)
from fspdcov.regularizers import EstimatorConfig

from util_matrices import random_pd


def enumerate_active_sets(sigma):
    """Exhaustive no-short oracle: equality-solve every support, keep the
    feasible best."""
    p = sigma.shape[0]
    best_w, best_obj = None, np.inf
    for r in range(1, p + 1):
        for subset in itertools.combinations(range(p), r):
            idx = list(subset)
            sub = sigma[np.ix_(idx, idx)]
            ones = np.ones(len(idx))
            try:
                y = np.linalg.solve(sub, ones)
            except np.linalg.LinAlgError:
                continue
            denom = ones @ y
            if denom <= 0:
                continue
            w_sub = y / denom
            if np.any(w_sub < -1e-12):
                continue
            w = np.zeros(p)
            w[idx] = w_sub
            obj = float(w @ sigma @ w)
            if obj < best_obj:
                best_obj, best_w = obj, w
    return best_w, best_obj


def bisect_simplex_projection(v, tol=1e-14):
    """Independent projection oracle: bisection on the shift tau."""
    v = np.asarray(v, dtype=float)
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(np.maximum(v - mid, 0.0)) > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


class TestSimplexProjection:
    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            v = rng.standard_normal(int(rng.integers(2, 20))) * rng.uniform(0.1, 5)
            w = project_simplex(v)
            assert w.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(w >= 0.0)
            assert np.allclose(w, bisect_simplex_projection(v), atol=1e-10)

    def test_already_on_simplex(self):
        v = np.array([0.2, 0.3, 0.5])
        assert np.allclose(project_simplex(v), v, atol=1e-15)


class TestMvpSimple:
    def test_identity_equal_weights(self):
        w = mvp_simple(np.eye(3))
        assert np.allclose(w.weights, [1 / 3] * 3, atol=1e-14)

    def test_diagonal_inverse_variance(self):
        w = mvp_simple(np.diag([1.0, 2.0]))
        assert np.allclose(w.weights, [2 / 3, 1 / 3], atol=1e-14)

    def test_hand_2x2_with_short(self):
        w = mvp_simple(np.array([[1.0, 1.5], [1.5, 4.0]]))
        assert np.allclose(w.weights, [1.25, -0.25], atol=1e-12)
        assert w.objective == pytest.approx(0.875)

    def test_weights_sum_to_one_and_stationarity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            sigma = random_pd(rng, int(rng.integers(2, 12)))
            w = mvp_simple(sigma)
            assert abs(w.weights.sum() - 1.0) <= 1e-10
            g = sigma @ w.weights
            assert np.max(np.abs(g - g.mean())) <= 1e-8

    def test_non_pd_refused(self):
        with pytest.raises(NotPositiveDefiniteError, match="fspd"):
            mvp_simple(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestMvpNoShort:
    def test_hand_2x2_boundary(self):
        w = mvp_no_short(np.array([[1.0, 1.5], [1.5, 4.0]]))
        assert np.allclose(w.weights, [1.0, 0.0], atol=1e-8)
        assert w.objective == pytest.approx(1.0, abs=1e-8)
        assert 1 in w.active_constraints

    def test_diagonal_interior_equals_simple(self):
        sigma = np.diag([1.0, 2.0, 4.0])
        wn = mvp_no_short(sigma)
        ws = mvp_simple(sigma)
        assert np.allclose(wn.weights, ws.weights, atol=1e-9)
        assert wn.active_constraints.size == 0

    def test_matches_active_set_enumeration(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            p = int(rng.integers(2, 7))
            sigma = random_pd(rng, p, eig_low=0.2, eig_high=3.0)
            got = mvp_no_short(sigma)
            _, best_obj = enumerate_active_sets(sigma)
            assert got.converged
            assert got.objective == pytest.approx(best_obj, abs=1e-7)

    def test_feasibility_and_ordering(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            sigma = random_pd(rng, int(rng.integers(2, 10)))
            wn = mvp_no_short(sigma)
            ws = mvp_simple(sigma)
            assert abs(wn.weights.sum() - 1.0) <= 1e-10
            assert np.all(wn.weights >= -1e-10)
            assert wn.objective >= ws.objective - 1e-10

    def test_non_pd_refused(self):
        with pytest.raises(NotPositiveDefiniteError):
            mvp_no_short(np.array([[0.0, 0.0], [0.0, 0.0]]))


class TestAnnualization:
    def test_hand_example(self):
        # daily mean 0.001 and sd 0.01 exactly (two-point construction)
        a = 0.01 / math.sqrt(2.0)
        daily = np.array([0.001 + a, 0.001 - a])
        res = _annualize(daily, risk_free=0.05)
        assert res.realized_return == pytest.approx(0.252, abs=1e-12)
        assert res.realized_risk == pytest.approx(0.01 * math.sqrt(252), abs=1e-12)
        assert res.sharpe == pytest.approx(1.2725, abs=1e-4)
        assert res.sharpe_defined

    def test_zero_risk_sentinel(self):
        res = _annualize(np.full(10, 0.002), risk_free=0.05)
        assert res.realized_risk == 0.0
        assert not res.sharpe_defined
        assert math.isnan(res.sharpe)


class TestBacktest:
    def test_windows_and_periods(self):
        rng_returns = synthetic_returns(60 + 60 * 3, 8, seed=4)
        spec = BacktestSpec(
            returns=rng_returns, train_window=60, hold_window=60, risk_free_rate=5.0,
            estimator=EstimatorConfig(family="sample"), repair="sf",
        )
        result = backtest(spec)
        assert len(result.periods) == 3
        assert not any(p.failed for p in result.periods)
        assert result.simple.daily_returns.size == 180
        assert np.isfinite(result.risk_ratio_no_short_vs_simple)

    def test_zero_variance_hold_gives_undefined_sharpe(self):
        rng = np.random.default_rng(5)
        train = rng.standard_normal((12, 3))
        hold = np.tile([0.01, 0.02, 0.03], (5, 1))
        spec = BacktestSpec(
            returns=np.vstack([train, hold]), train_window=12, hold_window=5,
            estimator=EstimatorConfig(family="sample"), repair="inf", epsilon=1e-4,
        )
        result = backtest(spec)
        assert not any(p.failed for p in result.periods)
        assert not result.simple.sharpe_defined
        assert math.isnan(result.simple.sharpe)

    def test_window_overrun_rejected(self):
        with pytest.raises(ConfigurationError):
            BacktestSpec(returns=np.zeros((50, 4)) + np.eye(50, 4), train_window=60,
                         hold_window=60)

    def test_failed_period_skipped_with_warning(self):
        # constant training window: zero covariance, unrepaired -> solver fails
        returns = np.vstack([np.ones((12, 3)), np.random.default_rng(6).standard_normal((5, 3))])
        spec = BacktestSpec(returns=returns, train_window=12, hold_window=5,
                            estimator=EstimatorConfig(family="sample"), repair="none")
        with pytest.warns(RuntimeWarning, match="skipped"):
            result = backtest(spec)
        assert result.periods[0].failed
        assert result.simple.daily_returns.size == 0

    def test_deterministic(self):
        returns = synthetic_returns(200, 6, seed=7)
        spec = BacktestSpec(returns=returns, train_window=60, hold_window=60,
                            risk_free_rate=5.0,
                            estimator=EstimatorConfig(family="threshold", lam="adaptive"),
                            repair="sf")
        a = backtest(spec)
        b = backtest(spec)
        assert np.array_equal(a.simple.daily_returns, b.simple.daily_returns)
        assert a.no_short.sharpe == b.no_short.sharpe

    def test_no_short_risk_ratio_reported_across_seeds(self):
        # soft report check, not a hard inequality: the ratio field exists
        # and stays finite on healthy synthetic runs
        for seed in range(3):
            returns = synthetic_returns(60 * 4, 10, seed=seed)
            spec = BacktestSpec(returns=returns, train_window=60, hold_window=60,
                                risk_free_rate=5.0,
                                estimator=EstimatorConfig(family="sample"), repair="sf")
            result = backtest(spec)
            assert np.isfinite(result.risk_ratio_no_short_vs_simple)
