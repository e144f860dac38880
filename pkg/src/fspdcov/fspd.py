"""Optimization-free positive-definiteness repair with fixed support.

Given a symmetric estimate whose smallest eigenvalue falls below a cut-point
``epsilon``, the repair returns the convex combination

    alpha * m + (1 - alpha) * mu * I

with ``alpha = (mu - epsilon) / (mu - gamma_min)``, which places the smallest
eigenvalue exactly at ``epsilon`` while scaling off-diagonal entries by a
positive constant, so the sparsity pattern and off-diagonal signs survive
unchanged. The shrinkage target ``mu`` can minimize the spectral distance to
the input (``mu_S``), the scaled Frobenius distance (``mu_F``), both at once
(``mu_SF = max`` of the two), or be sent to infinity, which degenerates into
the additive shift ``m + (epsilon - gamma_min) * I``.

Everything here is generic over the matrix's meaning: covariance and
precision estimates are repaired identically.

All selection rules need only four spectral functionals: the extreme
eigenvalues plus the eigenvalue mean and variance. Up to ``p = 512`` those
come from a dense symmetric eigensolve (fastest at that scale); above it
they come from traces plus a Krylov solve of the two extremes, so no full
eigendecomposition is required and every mu rule stays available.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import ConfigurationError, DegenerateSpectrumError
from .linalg import SpectralSummary
from .validation import check_symmetric

DEFAULT_EPSILON = 1e-2
MU_RULES = ("mu_s", "mu_f", "mu_sf", "explicit", "infinite")

# dense eigensolves win below this size; traces + Lanczos above
FULL_SPECTRUM_DIM = 512

# relative spread below which a spectrum counts as scalar (m ~ c*I)
_DEGENERATE_REL = 1e-10


@dataclass(frozen=True)
class FspdPlan:
    """A fully resolved repair: applying it to the input reproduces the output.

    ``mu`` is ``math.inf`` for the additive-shift rule and ``None`` when no
    repair was needed. For finite-mu repairs, ``alpha`` lies in [0, 1) and
    ``alpha * gamma_min + (1 - alpha) * mu == epsilon`` up to round-off; the
    infinite rule stores the limiting ``alpha = 1.0``. ``mu_f_degenerate``
    flags that the Frobenius target was undefined (near-scalar input) and the
    spectral target was used in its place.
    """

    epsilon: float
    mu: float | None
    mu_rule: str
    alpha: float
    repaired: bool
    gamma_min: float
    mu_f_degenerate: bool = False


def alpha_star(gamma_min: float, epsilon: float, mu: float) -> float:
    """Largest feasible shrinkage weight (mu - epsilon) / (mu - gamma_min).

    Requires ``epsilon > gamma_min`` (otherwise no repair is needed and the
    caller should not be here) and ``mu >= epsilon``. ``mu = inf`` returns the
    limit 1.0; the additive-shift interpretation of that case lives in
    :func:`fspd_apply`.
    """
    if not epsilon > gamma_min:
        raise ValueError(
            "alpha_star is only defined for gamma_min < epsilon; "
            "the input is already positive definite at this cut-point"
        )
    if math.isinf(mu):
        return 1.0
    if mu < epsilon:
        raise ConfigurationError(f"mu must be >= epsilon, got mu={mu} < epsilon={epsilon}")
    return (mu - epsilon) / (mu - gamma_min)


def mu_spectral(summary: SpectralSummary, epsilon: float) -> float:
    """Smallest target minimizing the spectral-norm distance: max(eps, midrange)."""
    return max(epsilon, 0.5 * (summary.gamma_max + summary.gamma_min))


def _mu_frobenius_from_moments(gamma_min: float, spread: float, mean: float, var: float) -> float:
    # sum t = p*(mean - g1), sum t^2 = p*var + p*(mean - g1)^2 with t_i = g_i - g1
    if spread <= _DEGENERATE_REL * max(1.0, abs(gamma_min), abs(gamma_min + spread)):
        raise DegenerateSpectrumError(
            "all eigenvalues are (numerically) equal; mu_F is undefined, use mu_spectral"
        )
    d = mean - gamma_min
    return gamma_min + (var + d * d) / d


def mu_frobenius(eigenvalues, epsilon: float) -> float:
    """Target minimizing the scaled-Frobenius distance.

    Equals ``gamma_1 + sum_i (gamma_i - gamma_1)^2 / sum_i (gamma_i - gamma_1)``,
    the unique interior minimizer of the reduced one-dimensional objective
    (confirmed against a brute-force grid; note the additive ``gamma_1``).
    Undefined when all eigenvalues coincide. The returned value can in
    principle fall below ``epsilon``; :func:`fspd_apply` clamps it to the
    feasible boundary, which is then the constrained minimizer.
    """
    evs = np.asarray(eigenvalues, dtype=np.float64)
    if evs.ndim != 1 or evs.size < 1:
        raise ValueError("eigenvalues must be a 1-d sequence")
    g1 = float(evs.min())
    t = evs - g1
    spread = float(evs.max()) - g1
    mean = float(evs.mean())
    var = float(np.mean(t * t)) - (mean - g1) ** 2
    return _mu_frobenius_from_moments(g1, spread, mean, max(var, 0.0))


def mu_frobenius_summary(summary: SpectralSummary) -> float:
    """mu_F from the four spectral functionals alone (no spectrum needed)."""
    return _mu_frobenius_from_moments(
        summary.gamma_min,
        summary.gamma_max - summary.gamma_min,
        summary.gamma_mean,
        summary.gamma_var,
    )


def mu_sf(summary: SpectralSummary, eigenvalues=None, epsilon: float = DEFAULT_EPSILON):
    """The both-norms-safe target max(mu_S, mu_F).

    ``eigenvalues`` may supply the spectrum for the Frobenius part; when
    omitted, the summary identities are used. A degenerate Frobenius target
    (near-scalar input) falls back to the spectral one with a warning; the
    returned tuple's second element reports that fallback.

    Returns
    -------
    (mu, degenerate)
    """
    ms = mu_spectral(summary, epsilon)
    try:
        if eigenvalues is not None:
            mf = mu_frobenius(eigenvalues, epsilon)
        else:
            mf = mu_frobenius_summary(summary)
    except DegenerateSpectrumError:
        warnings.warn(
            "input is numerically a multiple of the identity; "
            "mu_F is undefined, falling back to mu_S",
            RuntimeWarning,
            stacklevel=2,
        )
        return ms, True
    return max(ms, mf), False


def fspd_apply(m, epsilon: float = DEFAULT_EPSILON, mu_choice="sf"):
    """Repair a symmetric matrix to have smallest eigenvalue >= epsilon.

    Parameters
    ----------
    m : array_like, shape (p, p)
        Symmetric matrix (covariance or precision estimate).
    epsilon : float
        Positive-definiteness cut-point (> 0).
    mu_choice : {"s", "f", "sf", "inf"} or float
        Shrinkage-target rule, or an explicit target value >= epsilon.

    Returns
    -------
    (repaired, plan) : (ndarray, FspdPlan)
        ``repaired is m``'s validated copy unchanged when its smallest
        eigenvalue already clears ``epsilon``. Otherwise the output's
        smallest eigenvalue equals ``epsilon`` (within round-off), its
        off-diagonal support and signs match the input's exactly whenever
        ``alpha > 0``, and ``plan`` records the resolved (epsilon, mu,
        alpha). ``alpha == 0`` (complete shrinkage to ``epsilon * I``)
        happens only at the boundary ``mu == epsilon``, which the built-in
        rules reach only when the spectrum's midrange and the
        Frobenius-optimal target both sit at or below ``epsilon``.
    """
    if epsilon <= 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    a = check_symmetric(m)
    if a.shape[0] <= FULL_SPECTRUM_DIM:
        evs = np.linalg.eigvalsh(a)
        mean = float(evs.mean())
        summary = SpectralSummary(
            float(evs[0]), float(evs[-1]), mean, max(float(np.mean(evs * evs)) - mean * mean, 0.0)
        )
    else:
        summary = linalg._summary_raw(a)
    g1 = summary.gamma_min

    rule, explicit_mu = _parse_mu_choice(mu_choice, epsilon)

    if g1 >= epsilon:
        plan = FspdPlan(epsilon, None, rule, 1.0, False, g1)
        return a, plan

    if rule == "infinite":
        out = a + (epsilon - g1) * np.eye(a.shape[0])
        plan = FspdPlan(epsilon, math.inf, "infinite", 1.0, True, g1)
        return out, plan

    degenerate = False
    if rule == "mu_s":
        mu = mu_spectral(summary, epsilon)
    elif rule == "mu_f":
        mu = mu_frobenius_summary(summary)  # raises on degenerate spectrum
    elif rule == "mu_sf":
        mu, degenerate = mu_sf(summary, None, epsilon)
    else:
        mu = explicit_mu
    # the feasible region is mu >= epsilon; an interior mu_F below it means
    # the boundary is the constrained minimizer
    mu = max(mu, epsilon)
    alpha = alpha_star(g1, epsilon, mu)
    out = alpha * a
    idx = np.arange(a.shape[0])
    out[idx, idx] += (1.0 - alpha) * mu
    plan = FspdPlan(epsilon, float(mu), rule, float(alpha), True, g1, degenerate)
    return out, plan


def _parse_mu_choice(mu_choice, epsilon: float):
    if isinstance(mu_choice, str):
        key = mu_choice.lower()
        names = {"s": "mu_s", "f": "mu_f", "sf": "mu_sf", "inf": "infinite",
                 "mu_s": "mu_s", "mu_f": "mu_f", "mu_sf": "mu_sf", "infinite": "infinite"}
        if key not in names:
            raise ConfigurationError(f"unknown mu rule {mu_choice!r}")
        return names[key], None
    mu = float(mu_choice)
    if math.isinf(mu):
        return "infinite", None
    if mu < epsilon:
        raise ConfigurationError(f"explicit mu must be >= epsilon, got {mu} < {epsilon}")
    return "explicit", mu


def apply_plan(plan: FspdPlan, m) -> np.ndarray:
    """Re-apply a recorded plan to its input matrix."""
    a = check_symmetric(m)
    if not plan.repaired:
        return a
    p = a.shape[0]
    if plan.mu is not None and math.isinf(plan.mu):
        return a + (plan.epsilon - plan.gamma_min) * np.eye(p)
    out = plan.alpha * a
    idx = np.arange(p)
    out[idx, idx] += (1.0 - plan.alpha) * plan.mu
    return out


def distance_to_input(plan: FspdPlan, m, kind: str) -> float:
    """Norm of (repaired - input) under the given norm kind."""
    a = check_symmetric(m)
    if not plan.repaired:
        return 0.0
    diff = apply_plan(plan, a) - a
    return linalg.norm(diff, kind)


def distance_floor(eigenvalues, epsilon: float, kind: str, klass: str = "shrinkage") -> float:
    """Smallest achievable distance to the input over a repair class.

    ``klass="shrinkage"`` is the linear-shrinkage family this module
    searches; ``klass="pd"`` is the unconstrained class of all symmetric
    matrices with smallest eigenvalue >= epsilon. Only the spectral and
    scaled Frobenius norms have closed-form floors.
    """
    if kind not in ("spectral", "frobenius_scaled"):
        raise ConfigurationError(f"no closed-form floor for norm kind {kind!r}")
    if klass not in ("shrinkage", "pd"):
        raise ConfigurationError(f"unknown repair class {klass!r}")
    evs = np.asarray(eigenvalues, dtype=np.float64)
    g1 = float(evs.min())
    gap = max(epsilon - g1, 0.0)
    if gap == 0.0:
        return 0.0
    if kind == "spectral":
        return gap
    if klass == "pd":
        return float(np.sqrt(np.mean(np.maximum(epsilon - evs, 0.0) ** 2)))
    t = evs - g1
    sum_t2 = float(np.sum(t * t))
    if sum_t2 == 0.0:
        # scalar input: every shrinkage is c*I, best is epsilon*I
        return gap
    centered = evs - evs.mean()
    return gap * float(np.sqrt(np.sum(centered * centered) / sum_t2))
