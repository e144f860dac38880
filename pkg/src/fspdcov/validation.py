"""Input validation helpers.

Symmetric matrices are represented as plain float64 ndarrays that are
exactly symmetric (``a[i, j] == a[j, i]`` bitwise) and marked read-only.
All public entry points funnel their matrix inputs through
:func:`check_symmetric` so the rest of the package can assume exact
symmetry and finiteness.
"""

from __future__ import annotations

import numpy as np

from .exceptions import AsymmetricInputError, DimensionError

SYMMETRY_TOL = 1e-8


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return (a + a.T) / 2, which is exactly symmetric in floating point."""
    a = np.asarray(a, dtype=np.float64)
    return (a + a.T) / 2.0


def check_symmetric(a, tol: float = SYMMETRY_TOL, name: str = "matrix") -> np.ndarray:
    """Validate a square symmetric matrix and return it exactly symmetrized.

    Parameters
    ----------
    a : array_like, shape (p, p)
        Candidate matrix.
    tol : float
        Maximum allowed entrywise asymmetry ``max |a_ij - a_ji|``.

    Returns
    -------
    ndarray
        Float64, exactly symmetric, read-only.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionError(f"{name} must be at least 1x1")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > tol:
        raise AsymmetricInputError(asym, tol)
    out = symmetrize(a)
    out.flags.writeable = False
    return out


def check_data(x, name: str = "data") -> np.ndarray:
    """Validate an n x p observation matrix (n >= 2, finite entries)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {x.shape}")
    n, p = x.shape
    if n < 2:
        raise DimensionError(f"{name} needs at least 2 observations, got {n}")
    if p < 1:
        raise DimensionError(f"{name} needs at least 1 variable")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x
