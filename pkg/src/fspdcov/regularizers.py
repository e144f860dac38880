"""First-stage regularized covariance estimators.

Sample covariance, universal thresholding (hard / soft / SCAD), entry-adaptive
soft thresholding, banding, and tapering. All estimators operate elementwise
on the sample covariance matrix and return exactly symmetric matrices; none
of them guarantees positive definiteness (that is the repair stage's job).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .validation import check_data, check_symmetric

THRESHOLD_RULES = ("hard", "soft", "scad")
DIAGONAL_POLICIES = ("threshold_all", "preserve_diagonal")


@dataclass(frozen=True)
class EstimatorConfig:
    """Declarative description of a first-stage estimator.

    ``lam`` is a nonnegative threshold, the string ``"adaptive"``
    (entry-adaptive thresholds), or the string ``"cv"`` (to be resolved by
    cross-validation before fitting). ``bandwidth`` applies to the
    banding/tapering families and may likewise be ``"cv"``.
    """

    family: str = "threshold"
    rule: str = "soft"
    scad_a: float = 3.7
    lam: float | str = "cv"
    adaptive_delta: float = 2.0
    bandwidth: int | str = 0
    diagonal_policy: str = "preserve_diagonal"

    def __post_init__(self):
        if self.family not in ("sample", "threshold", "banding", "tapering"):
            raise ConfigurationError(f"unknown estimator family {self.family!r}")
        if self.rule not in THRESHOLD_RULES:
            raise ConfigurationError(f"unknown threshold rule {self.rule!r}")
        if self.scad_a <= 2:
            raise ConfigurationError("scad_a must exceed 2")
        if isinstance(self.lam, str):
            if self.lam not in ("adaptive", "cv"):
                raise ConfigurationError(f"lam must be a number, 'adaptive' or 'cv', got {self.lam!r}")
        elif self.lam < 0:
            raise ConfigurationError("lam must be nonnegative")
        if self.adaptive_delta <= 0:
            raise ConfigurationError("adaptive_delta must be positive")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "cv":
                raise ConfigurationError(f"bandwidth must be an integer or 'cv', got {self.bandwidth!r}")
        elif self.bandwidth < 0:
            raise ConfigurationError("bandwidth must be nonnegative")
        if self.diagonal_policy not in DIAGONAL_POLICIES:
            raise ConfigurationError(f"unknown diagonal policy {self.diagonal_policy!r}")


def sample_cov(data) -> np.ndarray:
    """Unbiased sample covariance matrix, exactly symmetric.

    ``S = (1/(n-1)) * sum_i (x_i - xbar)(x_i - xbar)^T`` for the n rows of
    ``data``. Requires n >= 2.
    """
    x = check_data(data)
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    s = xc.T @ xc / (n - 1)
    return (s + s.T) / 2.0


def apply_threshold_rule(s, lam: float, rule: str = "soft", scad_a: float = 3.7):
    """Apply a thresholding rule elementwise.

    hard:  s * 1{|s| >= lam}
    soft:  sign(s) * (|s| - lam)_+
    scad:  soft for |s| <= 2*lam, the linear interpolation
           ((a-1)*s - sign(s)*a*lam)/(a-2) for 2*lam < |s| <= a*lam,
           and s unchanged for |s| > a*lam.

    Accepts scalars or arrays; returns the same shape.
    """
    if lam < 0:
        raise ConfigurationError("lam must be nonnegative")
    if rule not in THRESHOLD_RULES:
        raise ConfigurationError(f"unknown threshold rule {rule!r}")
    arr = np.asarray(s, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = _rule(arr, lam, rule, scad_a)
    return float(out[0]) if scalar and out.size == 1 else out


def _rule(arr: np.ndarray, lam, rule: str, scad_a: float) -> np.ndarray:
    absa = np.abs(arr)
    if rule == "hard":
        return np.where(absa >= lam, arr, 0.0)
    soft = np.sign(arr) * np.maximum(absa - lam, 0.0)
    if rule == "soft":
        return soft
    if scad_a <= 2:
        raise ConfigurationError("scad_a must exceed 2")
    a = scad_a
    mid = ((a - 1.0) * arr - np.sign(arr) * a * lam) / (a - 2.0)
    out = np.where(absa <= 2.0 * lam, soft, mid)
    return np.where(absa > a * lam, arr, out)


def threshold_estimator(
    s,
    lam: float,
    rule: str = "soft",
    scad_a: float = 3.7,
    diagonal_policy: str = "preserve_diagonal",
) -> np.ndarray:
    """Threshold the entries of a symmetric matrix.

    Under ``preserve_diagonal`` the diagonal passes through untouched.
    """
    if diagonal_policy not in DIAGONAL_POLICIES:
        raise ConfigurationError(f"unknown diagonal policy {diagonal_policy!r}")
    a = check_symmetric(s)
    lam = np.asarray(lam, dtype=np.float64)
    out = _rule(a, lam, rule, scad_a)
    if diagonal_policy == "preserve_diagonal":
        np.fill_diagonal(out, np.diag(a))
    return out


def adaptive_threshold_estimator(data, delta: float = 2.0) -> np.ndarray:
    """Entry-adaptive soft thresholding of the sample covariance.

    Each off-diagonal s_ij is soft-thresholded at

        lam_ij = delta * sqrt(theta_ij * log(p) / n),

    where theta_ij = (1/n) * sum_k [(x_ki - xbar_i)(x_kj - xbar_j) - sbar_ij]^2
    is the empirical variance of the centered cross products (sbar_ij is their
    (1/n)-mean). The matrix being thresholded is the unbiased sample
    covariance; the diagonal is preserved.
    """
    if delta <= 0:
        raise ConfigurationError("delta must be positive")
    x = check_data(data)
    n, p = x.shape
    xc = x - x.mean(axis=0)
    s = sample_cov(x)
    sbar = xc.T @ xc / n
    sq = xc * xc
    theta = sq.T @ sq / n - sbar * sbar
    np.maximum(theta, 0.0, out=theta)          # guard FP round-off
    lam = delta * np.sqrt(theta * np.log(p) / n)
    lam = (lam + lam.T) / 2.0
    return threshold_estimator(s, lam, rule="soft", diagonal_policy="preserve_diagonal")


def _band_weights(p: int, h: int, tapered: bool) -> np.ndarray:
    m = np.abs(np.subtract.outer(np.arange(p), np.arange(p))).astype(np.float64)
    if not tapered:
        return (m <= h).astype(np.float64)
    w = np.where(m <= h / 2.0, 1.0, 2.0 - 2.0 * m / h)
    return np.where(m > h, 0.0, w)


def banding_estimator(s, h: int) -> np.ndarray:
    """Keep entries within bandwidth h of the diagonal, zero the rest."""
    a = check_symmetric(s)
    p = a.shape[0]
    if not 0 <= h <= p - 1:
        raise ConfigurationError(f"bandwidth must lie in [0, {p - 1}], got {h}")
    return a * _band_weights(p, h, tapered=False)


def tapering_estimator(s, h: int) -> np.ndarray:
    """Smoothly down-weight entries by distance from the diagonal.

    Weight 1 for |i-j| <= h/2, linear decay 2 - 2|i-j|/h up to h, 0 beyond.
    """
    a = check_symmetric(s)
    p = a.shape[0]
    if not 1 <= h <= p - 1:
        raise ConfigurationError(f"tapering bandwidth must lie in [1, {p - 1}], got {h}")
    return a * _band_weights(p, h, tapered=True)


def fit_config(config: EstimatorConfig, data, *, sample=None, lam: float | None = None) -> np.ndarray:
    """Fit an estimator described by ``config`` on an observation matrix.

    ``sample`` may carry a precomputed sample covariance. ``lam`` (or an
    integer bandwidth through it) resolves a ``"cv"`` placeholder; passing a
    config whose tuning parameter is still ``"cv"`` without a resolution is
    an error, since this function does no selection itself.
    """
    if config.family == "sample":
        return sample_cov(data) if sample is None else check_symmetric(sample)
    if config.family == "threshold":
        if config.lam == "adaptive":
            return adaptive_threshold_estimator(data, config.adaptive_delta)
        value = config.lam if lam is None else lam
        if isinstance(value, str):
            raise ConfigurationError("threshold lam is 'cv' but no resolved value was supplied")
        s = sample_cov(data) if sample is None else check_symmetric(sample)
        return threshold_estimator(s, float(value), config.rule, config.scad_a, config.diagonal_policy)
    value = config.bandwidth if lam is None else lam
    if isinstance(value, str):
        raise ConfigurationError("bandwidth is 'cv' but no resolved value was supplied")
    s = sample_cov(data) if sample is None else check_symmetric(sample)
    h = int(value)
    if config.family == "banding":
        return banding_estimator(s, h)
    return tapering_estimator(s, h)
