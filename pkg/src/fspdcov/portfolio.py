"""Minimum-variance portfolios and a rolling-window backtest.

``mvp_simple`` solves min w'Sw subject to w'1 = 1 in closed form;
``mvp_no_short`` adds w >= 0 and solves the simplex-constrained QP by
projected gradient with an exact sort-based simplex projection. Both refuse
non-positive-definite inputs: repair the estimate first (``fspd_apply``).

The backtest refits the covariance pipeline on a trailing window, holds the
resulting portfolio for a fixed number of days, and annualizes with the
252-trading-day convention: return = mean * 252, risk = sd * sqrt(252),
Sharpe = (return - risk_free) / risk. The risk-free rate must be expressed
in the same units as the annualized returns (0.05 for fractional daily
returns, 5.0 for percent-scaled ones).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .exceptions import ConfigurationError, NotPositiveDefiniteError
from .fspd import fspd_apply
from .regularizers import EstimatorConfig, fit_config, sample_cov
from .selection import CvSpec, cross_validate, default_lambda_grid
from .validation import check_data, check_symmetric

TRADING_DAYS = 252


@dataclass
class PortfolioWeights:
    weights: np.ndarray
    objective: float
    active_constraints: np.ndarray  # indices pinned at zero (no-short case)
    converged: bool = True


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (exact, sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _require_pd(sigma) -> tuple[np.ndarray, np.ndarray]:
    a = check_symmetric(sigma)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefiniteError(
            "covariance must be positive definite; repair it first (fspd_apply)"
        ) from err
    return a, chol


def mvp_simple(sigma) -> PortfolioWeights:
    """Global minimum-variance weights w = S^-1 1 / (1' S^-1 1)."""
    a, chol = _require_pd(sigma)
    ones = np.ones(a.shape[0])
    y = np.linalg.solve(chol.T, np.linalg.solve(chol, ones))
    denom = float(ones @ y)
    w = y / denom
    return PortfolioWeights(
        weights=w,
        objective=1.0 / denom,
        active_constraints=np.empty(0, dtype=int),
    )


def mvp_no_short(sigma, tol: float = 1e-10, max_iter: int = 200_000) -> PortfolioWeights:
    """Minimum-variance weights under w >= 0, by projected gradient.

    Steps of length 1/L with L = 2*lambda_max, backtracked if the local
    quadratic model is violated; terminates when the KKT residual (largest
    gradient excess over the active set's common value) drops below 1e-8.
    """
    a, _ = _require_pd(sigma)
    p = a.shape[0]
    lmax = linalg._extremes_raw(a)[1]
    step = 1.0 / (2.0 * lmax)
    w = np.full(p, 1.0 / p)
    obj = float(w @ a @ w)
    converged = False
    for _ in range(max_iter):
        g = 2.0 * (a @ w)
        t = step
        while True:
            w_new = project_simplex(w - t * g)
            d = w_new - w
            obj_new = float(w_new @ a @ w_new)
            # relative slack: the model comparison cancels to FP noise near
            # convergence, and t <= 1/(2*lmax) provably satisfies it exactly
            model = obj + float(g @ d) + float(d @ d) / (2.0 * t)
            if obj_new <= model + 1e-12 * max(1.0, abs(obj)):
                break
            t *= 0.5
            if t < 1e-18:
                w_new, obj_new = w, obj
                break
        stalled = float(np.max(np.abs(w_new - w))) == 0.0
        w, obj = w_new, obj_new
        g = 2.0 * (a @ w)
        support = w > tol
        kkt = float(np.max(g[support]) - np.min(g)) if support.any() else 0.0
        if kkt <= 1e-8:
            converged = True
            break
        if stalled:  # at numerical resolution; no further progress possible
            break
    if not converged:
        warnings.warn("no-short MVP did not reach the KKT tolerance", RuntimeWarning, stacklevel=2)
    return PortfolioWeights(
        weights=w,
        objective=obj,
        active_constraints=np.nonzero(w <= tol)[0],
        converged=converged,
    )


@dataclass(frozen=True)
class BacktestSpec:
    """Rolling backtest configuration.

    ``returns`` holds one day per row (fractions or percent, your choice;
    keep ``risk_free_rate`` in matching annualized units). The estimator
    pipeline is refit on each training window; ``repair`` is an fspd rule
    name ("sf", "s", "f", "inf") or "none".
    """

    returns: np.ndarray
    train_window: int = 60
    hold_window: int = 60
    risk_free_rate: float = 0.05
    estimator: EstimatorConfig = field(
        default_factory=lambda: EstimatorConfig(family="threshold", rule="soft", lam="adaptive")
    )
    repair: str = "sf"
    epsilon: float = 1e-2
    cv_folds: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        r = check_data(self.returns, name="returns")
        object.__setattr__(self, "returns", r)
        if self.train_window < 2 or self.hold_window < 1:
            raise ConfigurationError("train_window >= 2 and hold_window >= 1 required")
        if self.train_window + self.hold_window > r.shape[0]:
            raise ConfigurationError(
                f"train+hold = {self.train_window + self.hold_window} exceeds "
                f"series length {r.shape[0]}"
            )
        if self.repair not in ("none", "s", "f", "sf", "inf"):
            raise ConfigurationError(f"unknown repair {self.repair!r}")


@dataclass
class VariantResult:
    realized_return: float
    realized_risk: float
    sharpe: float            # NaN when undefined (zero risk)
    sharpe_defined: bool
    daily_returns: np.ndarray


@dataclass
class PeriodRecord:
    period: int
    train_start: int
    hold_start: int
    failed: bool = False
    error: Optional[str] = None


@dataclass
class BacktestResult:
    spec: BacktestSpec
    periods: list[PeriodRecord]
    simple: VariantResult
    no_short: VariantResult
    # soft comparison emitted for reporting, not asserted: no-short risk
    # is competitive with (at most modestly above) the simple MVP risk
    risk_ratio_no_short_vs_simple: float = math.nan


def _annualize(daily: np.ndarray, risk_free: float) -> VariantResult:
    if daily.size == 0:
        return VariantResult(math.nan, math.nan, math.nan, False, daily)
    ann_ret = float(daily.mean()) * TRADING_DAYS
    sd = float(daily.std(ddof=1)) if daily.size > 1 else 0.0
    ann_risk = sd * math.sqrt(TRADING_DAYS)
    # constant series leave FP dust in the sd; treat it as exactly zero
    if ann_risk <= 1e-12 * max(1.0, abs(ann_ret)):
        return VariantResult(ann_ret, 0.0, math.nan, False, daily)
    return VariantResult(ann_ret, ann_risk, (ann_ret - risk_free) / ann_risk, True, daily)


def _fit_window(spec: BacktestSpec, window: np.ndarray) -> np.ndarray:
    config = spec.estimator
    lam = None
    if config.family in ("threshold",) and config.lam == "cv":
        s = sample_cov(window)
        grid = default_lambda_grid(s)

        def factory(l):
            return lambda train: fit_config(config, train, lam=l)

        lam, _ = cross_validate(
            window, factory, CvSpec(folds=spec.cv_folds, grid=grid, rng_seed=spec.rng_seed)
        )
    est = fit_config(config, window, lam=lam)
    if spec.repair == "none":
        return est
    repaired, _ = fspd_apply(est, spec.epsilon, spec.repair)
    return repaired


def backtest(spec: BacktestSpec) -> BacktestResult:
    """Non-overlapping rolling backtest of both MVP variants.

    Each period trains on the trailing ``train_window`` days, then holds the
    simple and no-short portfolios for ``hold_window`` days, recording daily
    portfolio returns. Periods whose fit or solve fails are skipped with a
    warning and recorded.
    """
    r = spec.returns
    n_days = r.shape[0]
    n_periods = (n_days - spec.train_window) // spec.hold_window
    periods: list[PeriodRecord] = []
    simple_daily: list[np.ndarray] = []
    noshort_daily: list[np.ndarray] = []
    for j in range(n_periods):
        train_start = j * spec.hold_window
        hold_start = train_start + spec.train_window
        rec = PeriodRecord(period=j, train_start=train_start, hold_start=hold_start)
        window = r[train_start:hold_start]
        hold = r[hold_start:hold_start + spec.hold_window]
        try:
            sigma = _fit_window(spec, window)
            ws = mvp_simple(sigma)
            wn = mvp_no_short(sigma)
        except Exception as err:
            rec.failed = True
            rec.error = f"{type(err).__name__}: {err}"
            warnings.warn(f"backtest period {j} skipped: {rec.error}", RuntimeWarning, stacklevel=2)
            periods.append(rec)
            continue
        simple_daily.append(hold @ ws.weights)
        noshort_daily.append(hold @ wn.weights)
        periods.append(rec)
    simple = _annualize(np.concatenate(simple_daily) if simple_daily else np.empty(0),
                        spec.risk_free_rate)
    no_short = _annualize(np.concatenate(noshort_daily) if noshort_daily else np.empty(0),
                          spec.risk_free_rate)
    ratio = math.nan
    if simple.realized_risk and not math.isnan(simple.realized_risk) and simple.realized_risk > 0:
        ratio = no_short.realized_risk / simple.realized_risk
    return BacktestResult(spec=spec, periods=periods, simple=simple, no_short=no_short,
                          risk_ratio_no_short_vs_simple=ratio)


def synthetic_returns(days: int, assets: int, seed=0, factors: int = 3) -> np.ndarray:
    """Percent-scaled synthetic daily returns from a small factor model.

    Suitable for exercising the backtest when no real return file is at
    hand; pair with ``risk_free_rate=5.0`` (percent units).
    """
    if days < 4 or assets < 2:
        raise ConfigurationError("need days >= 4 and assets >= 2")
    rng = np.random.default_rng(seed)
    loadings = rng.uniform(0.2, 1.2, size=(assets, factors))
    factor_sd = np.linspace(1.2, 0.4, factors)
    f = rng.standard_normal((days, factors)) * factor_sd
    idio = 0.7 * rng.standard_normal((days, assets))
    return 0.03 + f @ loadings.T + idio
