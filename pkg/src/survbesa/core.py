"""Censored survival data and the algebra of step survival functions.

A step survival function is right-continuous and piecewise constant: it
equals 1 on [0, t_1) and S_l on [t_l, t_{l+1}).  Everything downstream
(kernel estimators, ensembling, attention) manipulates these curves, so
evaluation, grid rebasing, expected times and Kolmogorov-Smirnov distances
all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyDataset,
    EmptyGrid,
    GridNotSuperset,
    InvalidValue,
)

# Construction tolerates monotonicity noise up to this much before rejecting;
# anything smaller is snapped so stored curves are exactly non-increasing.
MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class SurvivalRecord:
    """One observation: covariates, observed time, event flag (1 = event, 0 = censored)."""

    features: np.ndarray
    time: float
    event: int


class SurvivalDataset:
    """Censored sample held as arrays, with a time-sorted view.

    Records tied on time are ordered uncensored before censored so that
    product-limit computations see events first at each tie.
    """

    def __init__(self, X, times, events):
        X = np.array(X, dtype=float, copy=True)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        times = np.array(times, dtype=float, copy=True).ravel()
        events = np.array(events, dtype=float, copy=True).ravel()
        n = times.shape[0]
        if n == 0:
            raise EmptyDataset("dataset has no records")
        if X.shape[0] != n or events.shape[0] != n:
            raise DimensionMismatch(
                f"got {X.shape[0]} feature rows, {n} times, {events.shape[0]} events"
            )
        bad = ~np.all(np.isfinite(X), axis=1)
        if np.any(bad):
            raise InvalidValue(f"features: non-finite entry at record {np.argmax(bad)}")
        bad = ~np.isfinite(times) | (times <= 0)
        if np.any(bad):
            raise InvalidValue(
                f"time: non-positive or non-finite at record {np.argmax(bad)}"
            )
        bad = (events != 0.0) & (events != 1.0)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise InvalidValue(f"event: value {events[i]!r} at record {i} is not 0/1")

        self.X = X
        self.times = times
        self.events = events.astype(np.int64)
        # ascending time; ties put events (1) before censorings (0)
        self.sorted_order = np.lexsort((1 - self.events, self.times))
        self.X.flags.writeable = False
        self.times.flags.writeable = False
        self.events.flags.writeable = False
        self.sorted_order.flags.writeable = False

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def records(self) -> list[SurvivalRecord]:
        return [
            SurvivalRecord(self.X[i], float(self.times[i]), int(self.events[i]))
            for i in range(self.n)
        ]

    def sorted_times(self) -> np.ndarray:
        return self.times[self.sorted_order]

    def sorted_events(self) -> np.ndarray:
        return self.events[self.sorted_order]

    def sorted_features(self) -> np.ndarray:
        return self.X[self.sorted_order]

    def event_grid(self) -> np.ndarray:
        """Distinct uncensored event times in ascending order."""
        return np.unique(self.times[self.events == 1])

    def subset(self, indices) -> "SurvivalDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return SurvivalDataset(self.X[indices], self.times[indices], self.events[indices])

    @classmethod
    def from_arrays(cls, X, times, events) -> "SurvivalDataset":
        return cls(X, times, events)


def validate_dataset(records: Sequence[SurvivalRecord]) -> SurvivalDataset:
    """Build a dataset from records, checking values and tie-breaking the sort.

    Raises EmptyDataset, DimensionMismatch or InvalidValue; the message names
    the offending field and record index.
    """
    records = list(records)
    if not records:
        raise EmptyDataset("dataset has no records")
    d = np.asarray(records[0].features, dtype=float).ravel().shape[0]
    X = np.empty((len(records), d))
    times = np.empty(len(records))
    events = np.empty(len(records))
    for i, rec in enumerate(records):
        feat = np.asarray(rec.features, dtype=float).ravel()
        if feat.shape[0] != d:
            raise DimensionMismatch(
                f"record {i} has {feat.shape[0]} features, expected {d}"
            )
        X[i] = feat
        times[i] = rec.time
        events[i] = rec.event
    return SurvivalDataset(X, times, events)


@dataclass(frozen=True)
class StepSurvivalFunction:
    """Right-continuous step curve: value S_l on [t_l, t_{l+1}), 1 before t_1."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel().copy()
        if grid.size == 0:
            raise EmptyGrid("survival function needs at least one grid point")
        if grid.shape != values.shape:
            raise InvalidValue(
                f"grid has {grid.size} points but values has {values.size}"
            )
        if not np.all(np.isfinite(grid)) or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
            raise InvalidValue("grid: must be strictly increasing positive reals")
        if not np.all(np.isfinite(values)):
            raise InvalidValue("values: non-finite entry")
        if np.any(values > 1 + MONOTONE_TOL) or np.any(values < -MONOTONE_TOL):
            raise InvalidValue("values: outside [0, 1]")
        if np.any(np.diff(values) > MONOTONE_TOL):
            raise InvalidValue("values: must be non-increasing")
        # snap float noise so the stored curve is exactly monotone in [0, 1]
        values = np.minimum.accumulate(np.clip(values, 0.0, 1.0))
        grid = grid.copy()
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


def sf_eval(sf: StepSurvivalFunction, t):
    """Evaluate the step curve at time(s) t >= 0 (right-continuous lookup)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InvalidValue("t: must be non-negative")
    idx = np.searchsorted(sf.grid, t_arr, side="right") - 1
    out = np.where(idx < 0, 1.0, sf.values[np.maximum(idx, 0)])
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def rebase_to_grid(sf: StepSurvivalFunction, target) -> StepSurvivalFunction:
    """Re-express sf on a superset grid, carrying values forward between steps."""
    target = np.asarray(target, dtype=float).ravel()
    if target.size == 0 or np.any(np.diff(target) <= 0):
        raise InvalidValue("target grid must be non-empty and strictly increasing")
    if not np.all(np.isin(sf.grid, target)):
        raise GridNotSuperset("target grid must contain every source grid point")
    return StepSurvivalFunction(target, sf_eval(sf, target))


def step_expected_times(grid, values) -> np.ndarray:
    """Rectangle-sum expected times for one or many step curves on one grid.

    `values` is (..., m) aligned with the m-point grid; the sum uses the
    implicit (t_0 = 0, S_0 = 1) cell and stops at the last grid point.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    values = np.asarray(values, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("expected time needs a non-empty grid")
    widths = np.diff(grid)
    left = values[..., :-1]
    return grid[0] + left @ widths if widths.size else np.broadcast_to(
        grid[0], values.shape[:-1]
    ).astype(float).copy()


def expected_time(sf: StepSurvivalFunction) -> float:
    """Area under the step curve from 0 up to its last grid point."""
    return float(step_expected_times(sf.grid, sf.values))


def ks_distance(a: StepSurvivalFunction, b: StepSurvivalFunction) -> float:
    """Largest absolute gap between two step curves over all times.

    Step functions attain their supremum gap on the union of their
    breakpoints, so merging the grids makes the computation exact.
    """
    merged = np.union1d(a.grid, b.grid)
    return float(np.max(np.abs(sf_eval(a, merged) - sf_eval(b, merged))))
