"""Kernel-weighted product-limit estimation of conditional survival functions.

The estimator generalizes Kaplan-Meier: each training record gets a weight
from a Gaussian kernel in covariate space, and the product-limit recursion
uses those weights instead of uniform 1/n.  With uniform weights it reduces
exactly to Kaplan-Meier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import StepSurvivalFunction, SurvivalDataset
from .errors import DimensionMismatch, InvalidTau, NoUncensoredEvents

# Denominator guard in the product-limit recursion: once the remaining mass
# 1 - cumulative weight falls below this, the curve has effectively hit zero.
_DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class BeranModel:
    """Training data plus kernel temperature tau (softmax over -||x - x_i||^2 / tau)."""

    data: SurvivalDataset
    tau: float

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise InvalidTau(f"tau must be a positive real, got {self.tau!r}")
        if self.data.event_grid().size == 0:
            raise NoUncensoredEvents("training data has no uncensored events")


def fit_beran(data: SurvivalDataset, tau: float) -> BeranModel:
    return BeranModel(data, float(tau))


def kernel_weights(x, model: BeranModel) -> np.ndarray:
    """Softmax weights of the training records for one query point.

    Returned in the dataset's time-sorted order, which is the order the
    product-limit recursion consumes.
    """
    return kernel_weights_batch(np.asarray(x, dtype=float).reshape(1, -1), model)[0]


def kernel_weights_batch(X, model: BeranModel) -> np.ndarray:
    """(q, n) softmax weights for q query points, columns time-sorted."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.data.d:
        raise DimensionMismatch(
            f"query has {X.shape[1]} features, model expects {model.data.d}"
        )
    sq = cdist(X, model.data.sorted_features(), metric="sqeuclidean")
    logits = -sq / model.tau
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    w /= w.sum(axis=1, keepdims=True)
    return w


def product_limit_values(times, events, weights) -> tuple[np.ndarray, np.ndarray]:
    """Weighted product-limit curve from time-sorted records.

    `weights` is (n,) or (q, n) aligned with the sorted records.  Returns
    (grid, values) where grid is the distinct uncensored times and values
    is (..., m) of survival probabilities at those times.

    Each sorted record i contributes a factor (1 - w_i / (1 - W_{i-1}))
    when uncensored, where W_{i-1} is the weight mass strictly before it.
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    weights = np.asarray(weights, dtype=float)
    squeeze = weights.ndim == 1
    W = np.atleast_2d(weights)

    before = np.concatenate(
        [np.zeros((W.shape[0], 1)), np.cumsum(W, axis=1)[:, :-1]], axis=1
    )
    denom = np.maximum(1.0 - before, _DENOM_FLOOR)
    factors = np.where(events == 1, 1.0 - W / denom, 1.0)
    factors = np.clip(factors, 0.0, 1.0)
    curve = np.cumprod(factors, axis=1)

    grid = np.unique(times[events == 1])
    if grid.size == 0:
        raise NoUncensoredEvents("no uncensored events to place grid points at")
    # survival at t is the product over all sorted records with time <= t
    last = np.searchsorted(times, grid, side="right") - 1
    values = curve[:, last]
    values = np.minimum.accumulate(np.clip(values, 0.0, 1.0), axis=1)
    return grid, (values[0] if squeeze else values)


def beran_predict(model: BeranModel, x) -> StepSurvivalFunction:
    """Conditional survival curve at query x, on the model's event-time grid."""
    w = kernel_weights(x, model)
    grid, vals = product_limit_values(
        model.data.sorted_times(), model.data.sorted_events(), w
    )
    return StepSurvivalFunction(grid, vals)


def beran_predict_batch(model: BeranModel, X) -> tuple[np.ndarray, np.ndarray]:
    """(grid, (q, m) values) for q query rows at once."""
    W = kernel_weights_batch(X, model)
    return product_limit_values(
        model.data.sorted_times(), model.data.sorted_events(), W
    )
