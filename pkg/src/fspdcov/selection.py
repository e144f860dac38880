"""K-fold cross-validation for tuning parameters.

The loss for a candidate parameter is the squared unscaled Frobenius
distance between the estimate fitted on the training folds and the plain
sample covariance of the held-out fold, averaged over folds. Ties are broken
toward the larger (sparser) parameter so golden tests stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError, DimensionError
from .regularizers import sample_cov
from .validation import check_data, check_symmetric


@dataclass(frozen=True)
class CvSpec:
    folds: int = 5
    grid: Sequence[float] = field(default_factory=tuple)
    loss_norm: str = "frobenius_unscaled"
    rng_seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigurationError("cross-validation needs at least 2 folds")
        if len(self.grid) == 0:
            raise ConfigurationError("cross-validation grid must be nonempty")
        if self.loss_norm != "frobenius_unscaled":
            raise ConfigurationError("only the unscaled Frobenius CV loss is supported")


def default_lambda_grid(s) -> np.ndarray:
    """101 equally spaced thresholds from 0 to the largest |off-diagonal|."""
    a = check_symmetric(s)
    if a.shape[0] < 2:
        raise DimensionError("lambda grid needs a matrix with p >= 2")
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return np.linspace(0.0, float(np.max(np.abs(off))), 101)


def default_bandwidth_grid(p: int) -> np.ndarray:
    """All admissible banding bandwidths 0..p-1."""
    if p < 2:
        raise DimensionError("bandwidth grid needs p >= 2")
    return np.arange(p)


def kfold_indices(n: int, folds: int, rng_seed: int = 0) -> list[np.ndarray]:
    """Random partition of range(n) into ``folds`` test index sets.

    The sets are disjoint, cover everything, and differ in size by at most 1.
    """
    if folds < 2 or folds > n:
        raise ConfigurationError(f"folds must lie in [2, n={n}], got {folds}")
    perm = np.random.default_rng(rng_seed).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(perm, folds)]


def cross_validate(data, estimator_factory: Callable, spec: CvSpec):
    """Select a tuning parameter by K-fold cross-validation.

    Parameters
    ----------
    data : array_like, shape (n, p)
        Observations, one per row.
    estimator_factory : callable
        Maps a candidate parameter to a fitting function
        ``train_data -> covariance matrix``.
    spec : CvSpec

    Returns
    -------
    (best_param, loss_curve)
        ``loss_curve[i]`` is the fold-averaged loss of ``spec.grid[i]``;
        ``best_param`` attains the minimum, ties resolved toward the larger
        parameter.
    """
    x = check_data(data)
    n = x.shape[0]
    if n < spec.folds:
        raise ConfigurationError(f"need at least folds={spec.folds} observations, got {n}")
    test_sets = kfold_indices(n, spec.folds, spec.rng_seed)
    grid = np.asarray(spec.grid, dtype=np.float64)
    losses = np.zeros(grid.shape[0])
    for test_idx in test_sets:
        if test_idx.size < 2:
            raise ConfigurationError(
                f"fold of size {test_idx.size} is too small for a test sample covariance"
            )
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        train = x[mask]
        if train.shape[0] < 2:
            raise ConfigurationError("training split is too small")
        s_test = sample_cov(x[test_idx])
        for i, theta in enumerate(grid):
            est = estimator_factory(theta)(train)
            diff = est - s_test
            losses[i] += float(np.sum(diff * diff))
    losses /= len(test_sets)
    best_idx = int(np.max(np.nonzero(losses == losses.min())[0]))
    return float(grid[best_idx]), losses
