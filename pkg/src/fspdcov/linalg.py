"""Dense symmetric eigensolvers, matrix norms, and trace-based spectral moments.

The two eigenvalue entry points are :func:`full_eigen` (complete spectrum,
LAPACK-backed) and :func:`extreme_eigen` (smallest/largest only, Lanczos with
full reorthogonalization). ``extreme_eigen`` falls back to ``full_eigen`` for
small matrices or when the iteration fails to converge, so it is never
silently wrong.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import EigenConvergenceError
from .validation import check_symmetric

# Lanczos is only worthwhile above this size; below it the dense solver wins.
FULL_FALLBACK_DIM = 64
KRYLOV_CAP = 100
MAX_RESTARTS = 5

_LANCZOS_SEED = 0x5EED
_RESID_REL = 1e-13

NORM_KINDS = ("spectral", "frobenius_scaled", "frobenius_unscaled", "operator_l1")


@dataclass(frozen=True)
class SpectralSummary:
    """The four spectral functionals driving the shrinkage repair.

    ``gamma_mean`` and ``gamma_var`` come from traces (no eigendecomposition);
    ``gamma_min``/``gamma_max`` from the extreme-eigenvalue solver.
    """

    gamma_min: float
    gamma_max: float
    gamma_mean: float
    gamma_var: float


def gershgorin_bounds(a: np.ndarray) -> tuple[float, float]:
    """Gershgorin lower/upper bounds on the spectrum of a symmetric matrix."""
    d = np.diag(a)
    r = np.sum(np.abs(a), axis=1) - np.abs(d)
    return float(np.min(d - r)), float(np.max(d + r))


def full_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Complete symmetric eigendecomposition.

    Parameters
    ----------
    m : array_like, shape (p, p)
        Symmetric matrix.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues ascending; eigenvectors orthonormal, one per column.

    Raises
    ------
    EigenConvergenceError
        If the underlying iteration does not converge.
    """
    a = check_symmetric(m)
    return _full_eigen_raw(a)


def _full_eigen_raw(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as err:
        p = a.shape[0]
        raise EigenConvergenceError(
            f"symmetric eigensolver failed to converge for a {p}x{p} matrix"
        ) from err
    return w, v


def extreme_eigen(m, which: str = "both"):
    """Smallest/largest eigenvalue(s) without computing the full spectrum.

    Lanczos with full reorthogonalization on the shifted matrix ``c*I - A``
    (``c`` the Gershgorin upper bound), whose top of the spectrum corresponds
    to the smallest eigenvalue of ``A``; both ends are read off the same
    Krylov space. Falls back to :func:`full_eigen` when ``p <= 64`` or when
    the iteration has not converged after its restart budget.

    Parameters
    ----------
    m : array_like, shape (p, p)
        Symmetric matrix.
    which : {"smallest", "largest", "both"}

    Returns
    -------
    float or (float, float)
        The requested eigenvalue, or ``(smallest, largest)``.
    """
    if which not in ("smallest", "largest", "both"):
        raise ValueError(f"which must be smallest/largest/both, got {which!r}")
    a = check_symmetric(m)
    lo, hi = _extremes_raw(a)
    if which == "smallest":
        return lo
    if which == "largest":
        return hi
    return lo, hi


def _extremes_raw(a: np.ndarray) -> tuple[float, float]:
    p = a.shape[0]
    if p <= FULL_FALLBACK_DIM:
        w = _full_eigen_raw(a)[0]
        return float(w[0]), float(w[-1])
    got = _lanczos_extremes(a)
    if got is None:
        w = _full_eigen_raw(a)[0]
        return float(w[0]), float(w[-1])
    return got


def _lanczos_extremes(a: np.ndarray) -> tuple[float, float] | None:
    """Both extreme eigenvalues via shifted Lanczos; None if not converged."""
    p = a.shape[0]
    c_lo, c_hi = gershgorin_bounds(a)
    scale = max(1.0, c_hi - c_lo)
    tol = _RESID_REL * scale
    cap = min(p, KRYLOV_CAP)
    rng = np.random.default_rng(_LANCZOS_SEED)

    q = rng.standard_normal(p)
    for _ in range(MAX_RESTARTS + 1):
        out, q = _lanczos_run(a, c_hi, q, cap, tol)
        if out is not None:
            return out
    return None


def _lanczos_run(a, shift, q0, cap, tol):
    """One Lanczos sweep on shift*I - a. Returns ((lo, hi) or None, restart vector)."""
    p = a.shape[0]
    q = q0 / np.linalg.norm(q0)
    Q = np.empty((p, cap))
    Q[:, 0] = q
    alphas: list[float] = []
    betas: list[float] = []
    k = 0
    while True:
        u = shift * Q[:, k] - a @ Q[:, k]
        alphas.append(float(Q[:, k] @ u))
        r = u - alphas[k] * Q[:, k]
        if k > 0:
            r -= betas[k - 1] * Q[:, k - 1]
        # full reorthogonalization, applied twice for robustness
        span = Q[:, : k + 1]
        r -= span @ (span.T @ r)
        r -= span @ (span.T @ r)
        b = float(np.linalg.norm(r))

        last = k + 1 == cap
        breakdown = b <= 1e-14 * max(1.0, abs(shift))
        # convergence checks cost an eigh of T; probe on a sparse cadence
        if last or breakdown or (k + 1) in (4, 8, 16) or (k + 1) % 8 == 0:
            T = np.diag(alphas)
            if k > 0:
                idx = np.arange(k)
                T[idx, idx + 1] = betas
                T[idx + 1, idx] = betas
            w, y = np.linalg.eigh(T)
            res_hi = abs(b * y[-1, -1])
            res_lo = abs(b * y[-1, 0])
            if (res_hi <= tol and res_lo <= tol) or breakdown:
                # spectrum of shift*I - a maps back as lambda = shift - theta
                return (float(shift - w[-1]), float(shift - w[0])), None
            if last:
                restart = Q[:, : k + 1] @ (y[:, -1] + y[:, 0])
                nrm = np.linalg.norm(restart)
                if nrm < 1e-12:
                    restart = np.random.default_rng(_LANCZOS_SEED + 1).standard_normal(p)
                return None, restart
        betas.append(b)
        k += 1
        Q[:, k] = r / b


def spectral_summary(m) -> SpectralSummary:
    """Spectral moments of a symmetric matrix without eigendecomposition.

    ``gamma_mean = tr(m)/p`` and ``gamma_var = tr(m^2)/p - gamma_mean^2``
    with ``tr(m^2)`` the sum of squared entries; the extremes come from
    :func:`extreme_eigen`.
    """
    a = check_symmetric(m)
    return _summary_raw(a)


def _summary_raw(a: np.ndarray) -> SpectralSummary:
    p = a.shape[0]
    mean = float(np.trace(a)) / p
    var = float(np.sum(a * a)) / p - mean * mean
    lo, hi = _extremes_raw(a)
    # var can round to a tiny negative for near-scalar matrices
    return SpectralSummary(lo, hi, mean, max(var, 0.0))


def norm(m, kind: str) -> float:
    """Matrix norm of a symmetric matrix.

    kind:
        ``spectral``            max |eigenvalue| (via extreme_eigen on both ends)
        ``frobenius_unscaled``  sqrt(sum of squared entries)
        ``frobenius_scaled``    frobenius_unscaled / sqrt(p)
        ``operator_l1``         max absolute column sum
    """
    if kind not in NORM_KINDS:
        raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")
    a = check_symmetric(m)
    return _norm_raw(a, kind)


def _norm_raw(a: np.ndarray, kind: str) -> float:
    if kind == "spectral":
        lo, hi = _extremes_raw(a)
        return max(abs(lo), abs(hi))
    if kind == "frobenius_unscaled":
        return float(np.sqrt(np.sum(a * a)))
    if kind == "frobenius_scaled":
        return float(np.sqrt(np.sum(a * a) / a.shape[0]))
    return float(np.max(np.sum(np.abs(a), axis=0)))
