"""Bagged ensembles of kernel product-limit learners.

Each learner is trained on a random subset drawn without replacement.  All
learner curves are re-expressed on one shared grid, the distinct uncensored
event times of the full training set, so downstream aggregation can work
with aligned value matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beran import BeranModel, beran_predict_batch, fit_beran
from .core import StepSurvivalFunction, SurvivalDataset
from .errors import (
    DegenerateSubsets,
    InvalidFraction,
    InvalidTau,
    NoUncensoredEvents,
)

# A subset needs at least two uncensored events for its learner to produce a
# curve with any shape; draws are retried this many times before giving up.
MAX_REDRAWS = 100
MIN_EVENTS_PER_SUBSET = 2


@dataclass(frozen=True)
class EnsembleModel:
    learners: tuple[BeranModel, ...]
    subsets: tuple[np.ndarray, ...]
    global_grid: np.ndarray
    fraction: float

    @property
    def n_learners(self) -> int:
        return len(self.learners)


def _draw_subset(rng, events, m):
    for _ in range(MAX_REDRAWS + 1):
        idx = rng.choice(events.shape[0], size=m, replace=False)
        if events[idx].sum() >= MIN_EVENTS_PER_SUBSET:
            return np.sort(idx)
    raise DegenerateSubsets(
        f"could not draw a subset of size {m} with "
        f"{MIN_EVENTS_PER_SUBSET} uncensored events in {MAX_REDRAWS} redraws"
    )


def fit_ensemble(
    data: SurvivalDataset,
    n_learners: int,
    fraction: float,
    tau,
    seed: int,
) -> EnsembleModel:
    """Train n_learners kernel estimators on random subsets of `data`.

    `tau` is a single temperature shared by all learners or a sequence of
    length n_learners.  Subsets have size round(fraction * n) and are drawn
    without replacement from independent seed substreams, so results do not
    depend on evaluation order.
    """
    if n_learners < 1:
        raise InvalidFraction(f"n_learners must be >= 1, got {n_learners}")
    if not (0.0 < fraction <= 1.0):
        raise InvalidFraction(f"fraction must lie in (0, 1], got {fraction}")
    taus = np.broadcast_to(np.asarray(tau, dtype=float).ravel(), (n_learners,)) \
        if np.ndim(tau) == 0 else np.asarray(tau, dtype=float).ravel()
    if taus.shape[0] != n_learners:
        raise InvalidTau(
            f"got {taus.shape[0]} tau values for {n_learners} learners"
        )

    global_grid = data.event_grid()
    if global_grid.size == 0:
        raise NoUncensoredEvents("training data has no uncensored events")

    m = int(round(fraction * data.n))
    if m < MIN_EVENTS_PER_SUBSET:
        raise DegenerateSubsets(
            f"subset size {m} cannot contain {MIN_EVENTS_PER_SUBSET} uncensored events"
        )

    streams = np.random.SeedSequence(seed).spawn(n_learners)
    learners, subsets = [], []
    for j in range(n_learners):
        rng = np.random.default_rng(streams[j])
        idx = _draw_subset(rng, data.events, m)
        learners.append(fit_beran(data.subset(idx), float(taus[j])))
        subsets.append(idx)
    return EnsembleModel(tuple(learners), tuple(subsets), global_grid, float(fraction))


def component_values(model: EnsembleModel, X) -> np.ndarray:
    """(q, M, G) learner survival values at q query rows, on the global grid."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    q, M, G = X.shape[0], model.n_learners, model.global_grid.size
    out = np.empty((q, M, G))
    for j, learner in enumerate(model.learners):
        grid_j, vals_j = beran_predict_batch(learner, X)
        # carry learner values forward onto the global grid (a superset,
        # since each subset's event times come from the full training set)
        pos = np.searchsorted(grid_j, model.global_grid, side="right") - 1
        out[:, j, :] = np.where(pos < 0, 1.0, vals_j[:, np.maximum(pos, 0)])
    return out


def predict_component_sfs(model: EnsembleModel, x) -> list[StepSurvivalFunction]:
    """Per-learner curves at one query point, all on the global grid."""
    vals = component_values(model, x)[0]
    return [StepSurvivalFunction(model.global_grid, v) for v in vals]


def predict_bagging(model: EnsembleModel, x) -> StepSurvivalFunction:
    """Plain bagging: pointwise mean of the learner curves."""
    vals = component_values(model, x)[0]
    return StepSurvivalFunction(model.global_grid, vals.mean(axis=0))


def predict_bagging_batch(model: EnsembleModel, X) -> np.ndarray:
    """(q, G) mean curves for q query rows."""
    return component_values(model, X).mean(axis=1)
