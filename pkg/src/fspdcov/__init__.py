"""Positive-definite covariance estimation toolkit.

Sparse first-stage estimators (thresholding, banding, tapering), an
optimization-free fixed-support positive-definiteness repair based on linear
shrinkage toward a scalar matrix, optimization-based PD baselines (ADMM and
log-determinant barrier), cross-validated tuning, and simulation/backtest
harnesses.
"""

from .exceptions import (
    AsymmetricInputError,
    ConfigurationError,
    DegenerateSpectrumError,
    DimensionError,
    EigenConvergenceError,
    NotPositiveDefiniteError,
)
from .fspd import (
    FspdPlan,
    alpha_star,
    apply_plan,
    distance_floor,
    distance_to_input,
    fspd_apply,
    mu_frobenius,
    mu_sf,
    mu_spectral,
)
from .linalg import SpectralSummary, extreme_eigen, full_eigen, norm, spectral_summary
from .pd_baselines import (
    AdmmConfig,
    BarrierConfig,
    SolverResult,
    eig_constraint_estimator,
    logdet_barrier_estimator,
)
from .portfolio import (
    BacktestSpec,
    PortfolioWeights,
    backtest,
    mvp_no_short,
    mvp_simple,
    project_simplex,
    synthetic_returns,
)
from .regularizers import (
    EstimatorConfig,
    adaptive_threshold_estimator,
    apply_threshold_rule,
    banding_estimator,
    sample_cov,
    tapering_estimator,
    threshold_estimator,
)
from .selection import CvSpec, cross_validate, default_lambda_grid, kfold_indices
from .simulation import (
    MethodSpec,
    RiskReport,
    ScenarioSpec,
    make_m1,
    make_m2,
    run_scenario,
    sample_gaussian,
    sample_student_t,
)
from .estimators import (
    BandingCovariance,
    EigConstraintCovariance,
    FspdRepair,
    LogDetBarrierCovariance,
    SampleCovariance,
    TaperingCovariance,
    ThresholdCovariance,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AsymmetricInputError",
    "BacktestSpec",
    "BandingCovariance",
    "BarrierConfig",
    "ConfigurationError",
    "CvSpec",
    "DegenerateSpectrumError",
    "DimensionError",
    "EigConstraintCovariance",
    "EigenConvergenceError",
    "EstimatorConfig",
    "FspdPlan",
    "FspdRepair",
    "LogDetBarrierCovariance",
    "MethodSpec",
    "NotPositiveDefiniteError",
    "PortfolioWeights",
    "RiskReport",
    "SampleCovariance",
    "ScenarioSpec",
    "SolverResult",
    "SpectralSummary",
    "TaperingCovariance",
    "ThresholdCovariance",
    "alpha_star",
    "adaptive_threshold_estimator",
    "apply_plan",
    "apply_threshold_rule",
    "backtest",
    "banding_estimator",
    "cross_validate",
    "default_lambda_grid",
    "distance_floor",
    "distance_to_input",
    "eig_constraint_estimator",
    "extreme_eigen",
    "fspd_apply",
    "full_eigen",
    "kfold_indices",
    "logdet_barrier_estimator",
    "make_m1",
    "make_m2",
    "mu_frobenius",
    "mu_sf",
    "mu_spectral",
    "mvp_no_short",
    "mvp_simple",
    "norm",
    "project_simplex",
    "run_scenario",
    "sample_cov",
    "sample_gaussian",
    "sample_student_t",
    "spectral_summary",
    "synthetic_returns",
    "threshold_estimator",
    "tapering_estimator",
]
