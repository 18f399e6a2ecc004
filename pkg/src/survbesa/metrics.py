"""Ranking quality for censored predictions.

A pair (i, j) is comparable when i's event was observed and happened
strictly before j's recorded time; the model is credited when it predicts
a shorter time for i.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .core import SurvivalDataset
from .errors import DegenerateVariance, DimensionMismatch, NoComparablePairs


def comparable_pairs(data: SurvivalDataset) -> np.ndarray:
    """(P, 2) index pairs with events[i] == 1 and times[i] < times[j]."""
    ok = (data.events[:, None] == 1) & (data.times[:, None] < data.times[None, :])
    i, j = np.nonzero(ok)
    return np.column_stack([i, j])


def c_index(predicted_times, data: SurvivalDataset, tie_half: bool = False) -> float:
    """Fraction of comparable pairs ranked correctly by the predictions.

    A pair counts when the predicted time for the earlier subject is strictly
    smaller.  Predicted ties score 0 by default; `tie_half` credits them 0.5.
    """
    predicted = np.asarray(predicted_times, dtype=float).ravel()
    if predicted.shape[0] != data.n:
        raise DimensionMismatch(
            f"got {predicted.shape[0]} predictions for {data.n} records"
        )
    pairs = comparable_pairs(data)
    if pairs.shape[0] == 0:
        raise NoComparablePairs("no comparable pairs in the data")
    pi, pj = predicted[pairs[:, 0]], predicted[pairs[:, 1]]
    score = np.sum(pi < pj)
    if tie_half:
        score = score + 0.5 * np.sum(pi == pj)
    return float(score / pairs.shape[0])


def paired_t_test(a, b) -> tuple[float, float]:
    """Two-sided paired t-test; returns (t statistic, p value).

    The statistic uses the mean difference over its standard error with
    n - 1 degrees of freedom; the p value comes from the regularized
    incomplete beta form of the t distribution's tail.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"got {a.size} and {b.size} paired samples")
    if a.size < 2:
        raise DegenerateVariance("need at least two pairs")
    diff = a - b
    sd = diff.std(ddof=1)
    if sd == 0:
        raise DegenerateVariance("paired differences have zero variance")
    n = diff.size
    t = diff.mean() / (sd / np.sqrt(n))
    nu = n - 1
    p = special.betainc(nu / 2.0, 0.5, nu / (nu + t * t))
    return float(t), float(p)
