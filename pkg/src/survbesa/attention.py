"""Self-attention over ensemble survival curves.

For one query point the M learner curves attend to each other: learner l's
adjusted curve is a convex combination of the other curves, weighted by a
softmax over negative Kolmogorov-Smirnov distances scaled by trainable
temperatures theta[l, k].  The model score for ranking is built from
expected times of the adjusted curves, normalized by the training horizon,
and the temperatures are trained to maximize a smooth concordance surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import StepSurvivalFunction, step_expected_times
from .errors import EmptyPairSet, GridMismatch, ModelMismatch, SingleLearner

# Temperatures are kept strictly positive: theta = softplus(raw) + THETA_FLOOR.
THETA_FLOOR = 1e-3


def softplus(x):
    return np.logaddexp(0.0, x)


def theta_from_raw(raw):
    return softplus(np.asarray(raw, dtype=float)) + THETA_FLOOR


def initial_raw(n_learners: int) -> np.ndarray:
    """Zero raw parameters: every temperature starts at softplus(0) + floor."""
    return np.zeros((n_learners, n_learners))


@dataclass(frozen=True)
class AttentionParams:
    """Trainable temperatures: theta = softplus(raw) + floor, elementwise."""

    raw: np.ndarray  # (M, M) unconstrained; diagonal entries are inert

    def __post_init__(self):
        raw = np.array(self.raw, dtype=float, copy=True)
        raw.flags.writeable = False
        object.__setattr__(self, "raw", raw)

    @property
    def theta(self) -> np.ndarray:
        return theta_from_raw(self.raw)

    @classmethod
    def initial(cls, n_learners: int) -> "AttentionParams":
        return cls(initial_raw(n_learners))


@dataclass(frozen=True)
class AttentionContext:
    """Everything attention needs about one query point.

    values: (M, G) learner curves on the shared grid.
    dist:   (M, M) pairwise sup-distances between the curves, zero diagonal.
    that:   (M,) expected times of the learner curves (raw time units).
    horizon: last shared grid point, the largest uncensored training time;
             expected times are divided by it wherever scores are compared.
    """

    grid: np.ndarray
    values: np.ndarray
    dist: np.ndarray
    that: np.ndarray
    horizon: float

    @property
    def n_learners(self) -> int:
        return self.values.shape[0]

    @property
    def that_normalized(self) -> np.ndarray:
        return self.that / self.horizon


def build_context(grid, values) -> AttentionContext:
    """Distances and expected times for one stack of aligned curves."""
    grid = np.asarray(grid, dtype=float).ravel()
    values = np.asarray(values, dtype=float)
    # aligned step curves attain their sup gap on the shared grid
    dist = np.max(np.abs(values[:, None, :] - values[None, :, :]), axis=-1)
    that = step_expected_times(grid, values)
    return AttentionContext(grid, values, dist, that, float(grid[-1]))


def contexts_for(model, X) -> list[AttentionContext]:
    """One context per query row, using the ensemble's shared grid."""
    from .ensemble import component_values

    vals = component_values(model, np.asarray(X, dtype=float))
    return [build_context(model.global_grid, v) for v in vals]


def attention_matrix(dist, theta) -> np.ndarray:
    """Row-softmax of -dist/theta with the diagonal masked out.

    Rows are the attending learners; each row sums to 1 over the other
    learners, and beta[l, l] = 0.
    """
    dist = np.asarray(dist, dtype=float)
    if dist.shape[0] < 2:
        raise SingleLearner("attention needs at least two learners")
    logits = -dist / np.asarray(theta, dtype=float)
    np.fill_diagonal(logits, -np.inf)
    logits = logits - logits.max(axis=1, keepdims=True)
    beta = np.exp(logits)
    beta /= beta.sum(axis=1, keepdims=True)
    return beta


def adjust_values(values, beta) -> np.ndarray:
    """(M, G) adjusted curves: row l is sum_k beta[l, k] * curve_k."""
    return np.asarray(beta) @ np.asarray(values)


def aggregate_values(values, beta) -> np.ndarray:
    """Mean of the adjusted curves: the ensemble's final curve values."""
    return adjust_values(values, beta).mean(axis=0)


def adjust_sfs(ctx: AttentionContext, beta) -> list[StepSurvivalFunction]:
    """Each learner's curve replaced by its attention mixture of the others."""
    return [
        StepSurvivalFunction(ctx.grid, row) for row in adjust_values(ctx.values, beta)
    ]


def aggregate_sf(adjusted: list[StepSurvivalFunction]) -> StepSurvivalFunction:
    """Mean of already-adjusted curves; they must share a grid."""
    grid = adjusted[0].grid
    for sf in adjusted[1:]:
        if sf.grid.shape != grid.shape or not np.array_equal(sf.grid, grid):
            raise GridMismatch("adjusted curves live on different grids")
    return StepSurvivalFunction(grid, np.mean([sf.values for sf in adjusted], axis=0))


def predict_attended(ctx: AttentionContext, theta) -> StepSurvivalFunction:
    beta = attention_matrix(ctx.dist, theta)
    return StepSurvivalFunction(ctx.grid, aggregate_values(ctx.values, beta))


def context_score(ctx: AttentionContext, theta) -> float:
    """sum_l sum_k beta[l,k] * that_norm[k]; proportional to the attended
    curve's expected time, so it ranks instances identically."""
    beta = attention_matrix(ctx.dist, theta)
    return float(np.sum(beta @ ctx.that_normalized))


def r_value(ctx_i: AttentionContext, ctx_j: AttentionContext, theta) -> float:
    """Score difference R_ij = score(j) - score(i); positive means the model
    ranks j as longer-lived than i."""
    if ctx_i.grid.shape != ctx_j.grid.shape or not np.array_equal(
        ctx_i.grid, ctx_j.grid
    ):
        raise ModelMismatch("contexts come from models with different grids")
    return context_score(ctx_j, theta) - context_score(ctx_i, theta)


class SurrogateObjective:
    """Smooth concordance surrogate sum_pairs sigmoid(R_ij) and its gradient.

    Stacks the per-instance distance matrices and normalized expected times
    once; each evaluation is a few einsums over (n, M, M) arrays.  The
    gradient in theta uses the closed form

        dR/dtheta[l,k] = Phi_j[l,k] - Phi_i[l,k],
        Phi_i[l,k] = beta_i[l,k] * (u_i[k] - arow_i[l]) * D_i[l,k] / theta[l,k]^2,

    where arow_i[l] is row l's beta-weighted mean of u_i, and the chain rule
    through theta = softplus(raw) + floor multiplies by sigmoid(raw).
    """

    def __init__(self, contexts: list[AttentionContext], pairs, slope: float = 1.0):
        if not contexts:
            raise EmptyPairSet("no contexts to train on")
        M = contexts[0].n_learners
        if M < 2:
            raise SingleLearner("attention needs at least two learners")
        pairs = np.asarray(pairs, dtype=np.int64)
        if pairs.size == 0:
            raise EmptyPairSet("no comparable pairs to train on")
        self.pairs = pairs.reshape(-1, 2)
        self.D = np.stack([c.dist for c in contexts])  # (n, M, M)
        self.U = np.stack([c.that_normalized for c in contexts])  # (n, M)
        self.n, self.M = self.U.shape
        self.slope = float(slope)  # optional sharpness of the sigmoid

    def _betas(self, theta):
        logits = -self.D / theta[None, :, :]
        logits[:, np.arange(self.M), np.arange(self.M)] = -np.inf
        logits -= logits.max(axis=2, keepdims=True)
        beta = np.exp(logits)
        beta /= beta.sum(axis=2, keepdims=True)
        return beta

    def scores(self, raw) -> np.ndarray:
        """(n,) ranking scores at the given raw parameters."""
        beta = self._betas(theta_from_raw(raw))
        return np.einsum("ilk,ik->i", beta, self.U)

    def pair_margins(self, raw) -> np.ndarray:
        a = self.scores(raw)
        return a[self.pairs[:, 1]] - a[self.pairs[:, 0]]

    def value_and_grad(self, raw):
        raw = np.asarray(raw, dtype=float)
        theta = theta_from_raw(raw)
        beta = self._betas(theta)
        arow = np.einsum("ilk,ik->il", beta, self.U)  # (n, M)
        a = arow.sum(axis=1)  # (n,)
        r = a[self.pairs[:, 1]] - a[self.pairs[:, 0]]
        sig = expit(self.slope * r)
        value = float(np.sum(sig))

        # per-instance weight: how much each instance's score gradient counts
        w = np.zeros(self.n)
        sp = self.slope * sig * (1.0 - sig)
        np.add.at(w, self.pairs[:, 1], sp)
        np.add.at(w, self.pairs[:, 0], -sp)

        phi = beta * (self.U[:, None, :] - arow[:, :, None]) * self.D / theta**2
        grad_theta = np.einsum("i,ilk->lk", w, phi)
        grad_raw = grad_theta * expit(raw)
        return value, grad_raw
