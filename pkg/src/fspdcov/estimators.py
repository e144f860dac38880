"""Scikit-learn style estimator classes.

Thin wrappers over the functional core so the estimators compose with
pipelines, ``clone``, and ``get_params``/``set_params``. Fitted covariance
estimators expose ``covariance_``; the repair transformer maps symmetric
matrices to their repaired versions and records the plan of its last
``transform`` in ``plan_``.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .fspd import fspd_apply
from .pd_baselines import AdmmConfig, BarrierConfig, eig_constraint_estimator, logdet_barrier_estimator
from .regularizers import (
    adaptive_threshold_estimator,
    banding_estimator,
    sample_cov,
    tapering_estimator,
    threshold_estimator,
)
from .selection import CvSpec, cross_validate, default_bandwidth_grid, default_lambda_grid
from .validation import check_data


class SampleCovariance(BaseEstimator):
    """Unbiased sample covariance."""

    def fit(self, X, y=None):
        X = check_data(X)
        self.covariance_ = sample_cov(X)
        self.n_features_in_ = X.shape[1]
        return self


class ThresholdCovariance(BaseEstimator):
    """Thresholded sample covariance.

    ``lam`` may be a nonnegative number, ``"cv"`` (K-fold selection over the
    default grid), or ``"adaptive"`` (entry-adaptive soft thresholds; the
    ``rule`` is then ignored).
    """

    def __init__(self, lam="cv", rule="soft", scad_a=3.7, adaptive_delta=2.0,
                 diagonal_policy="preserve_diagonal", cv_folds=5, random_state=0):
        self.lam = lam
        self.rule = rule
        self.scad_a = scad_a
        self.adaptive_delta = adaptive_delta
        self.diagonal_policy = diagonal_policy
        self.cv_folds = cv_folds
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_data(X)
        self.n_features_in_ = X.shape[1]
        if self.lam == "adaptive":
            self.covariance_ = adaptive_threshold_estimator(X, self.adaptive_delta)
            self.lambda_ = None
            return self
        s = sample_cov(X)
        if self.lam == "cv":
            grid = default_lambda_grid(s)

            def factory(lam):
                return lambda train: threshold_estimator(
                    sample_cov(train), lam, self.rule, self.scad_a, self.diagonal_policy
                )

            lam, curve = cross_validate(
                X, factory, CvSpec(folds=self.cv_folds, grid=grid, rng_seed=self.random_state)
            )
            self.cv_loss_curve_ = curve
        else:
            lam = float(self.lam)
        self.lambda_ = lam
        self.covariance_ = threshold_estimator(s, lam, self.rule, self.scad_a, self.diagonal_policy)
        return self


class _BandedCovariance(BaseEstimator):
    _taper = False

    def __init__(self, bandwidth="cv", cv_folds=5, random_state=0):
        self.bandwidth = bandwidth
        self.cv_folds = cv_folds
        self.random_state = random_state

    def _apply(self, s, h):
        return tapering_estimator(s, h) if self._taper else banding_estimator(s, h)

    def fit(self, X, y=None):
        X = check_data(X)
        self.n_features_in_ = X.shape[1]
        s = sample_cov(X)
        if self.bandwidth == "cv":
            grid = default_bandwidth_grid(X.shape[1])
            if self._taper:
                grid = grid[1:]

            def factory(h):
                return lambda train: self._apply(sample_cov(train), int(round(h)))

            h, curve = cross_validate(
                X, factory, CvSpec(folds=self.cv_folds, grid=grid, rng_seed=self.random_state)
            )
            h = int(round(h))
            self.cv_loss_curve_ = curve
        else:
            h = int(self.bandwidth)
        self.bandwidth_ = h
        self.covariance_ = self._apply(s, h)
        return self


class BandingCovariance(_BandedCovariance):
    """Banded sample covariance (indicator weights by |i - j|)."""


class TaperingCovariance(_BandedCovariance):
    """Tapered sample covariance (piecewise-linear weights by |i - j|)."""

    _taper = True


class FspdRepair(BaseEstimator, TransformerMixin):
    """Positive-definiteness repair as a matrix-to-matrix transformer.

    ``transform`` accepts a symmetric matrix and returns the repaired one;
    the plan of the latest call lands in ``plan_``. Stateless otherwise.
    """

    def __init__(self, epsilon=1e-2, mu="sf"):
        self.epsilon = epsilon
        self.mu = mu

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        out, plan = fspd_apply(X, self.epsilon, self.mu)
        self.plan_ = plan
        return out


class EigConstraintCovariance(BaseEstimator):
    """Sparse PD covariance via the eigenvalue-constraint program (ADMM)."""

    def __init__(self, lam=0.1, epsilon=1e-2, rho=2.0, rel_tol=1e-7, max_iter=5000):
        self.lam = lam
        self.epsilon = epsilon
        self.rho = rho
        self.rel_tol = rel_tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_data(X)
        self.n_features_in_ = X.shape[1]
        res = eig_constraint_estimator(
            sample_cov(X),
            AdmmConfig(lam=self.lam, epsilon=self.epsilon, rho=self.rho,
                       rel_tol=self.rel_tol, max_iter=self.max_iter),
        )
        self.covariance_ = res.matrix
        self.converged_ = res.converged
        self.n_iter_ = res.n_iter
        return self


class LogDetBarrierCovariance(BaseEstimator):
    """Sparse strictly-PD covariance via the log-determinant barrier program."""

    def __init__(self, lam=0.1, tau=1e-2, rel_tol=1e-7, max_iter=2000):
        self.lam = lam
        self.tau = tau
        self.rel_tol = rel_tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_data(X)
        self.n_features_in_ = X.shape[1]
        res = logdet_barrier_estimator(
            sample_cov(X),
            BarrierConfig(lam=self.lam, tau=self.tau, rel_tol=self.rel_tol,
                          max_iter=self.max_iter),
        )
        self.covariance_ = res.matrix
        self.converged_ = res.converged
        self.n_iter_ = res.n_iter
        return self
