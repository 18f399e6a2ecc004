"""Training loops and hyperparameter search.

Adam maximizes the sigmoid concordance surrogate over the attention
temperatures (full-batch, fixed epoch count).  Hyperparameters that do not
take gradients (kernel temperature, ensemble size, subset fraction, the
contamination knobs) are picked by seeded random search on a validation
split.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .attention import (
    AttentionParams,
    SurrogateObjective,
    attention_matrix,
    contexts_for,
    initial_raw,
)
from .contamination import (
    ContaminationParams,
    contaminated_matrix,
    precompute_qg,
    solve_contamination,
)
from .core import SurvivalDataset, step_expected_times
from .ensemble import EnsembleModel, fit_ensemble, predict_bagging_batch
from .errors import InvalidValue, SurvBesaError
from .metrics import c_index, comparable_pairs

MODEL_KINDS = ("survbesa", "survbesa-contam", "bagging", "single-beran")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    step_size: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    record_history: bool = True
    slope: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidValue(f"epochs must be >= 1, got {self.epochs}")
        if not np.isfinite(self.step_size) or self.step_size <= 0:
            raise InvalidValue(f"step_size must be positive, got {self.step_size}")


@dataclass(frozen=True)
class TrainHistory:
    """Per-epoch curves including the initial point (length epochs + 1)."""

    surrogate: np.ndarray
    train_c_index: np.ndarray


def train_general(
    ensemble: EnsembleModel,
    data: SurvivalDataset,
    config: TrainConfig,
    epoch_callback: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[AttentionParams, TrainHistory | None]:
    """Adam ascent on the surrogate from the uniform-attention start.

    The contexts (distances, expected times) are built once; only the
    temperatures move.  `epoch_callback(epoch, raw)` fires at the initial
    point and after every update, for callers that track extra curves.
    """
    contexts = contexts_for(ensemble, data.X)
    pairs = comparable_pairs(data)
    obj = SurrogateObjective(contexts, pairs, slope=config.slope)
    raw = initial_raw(ensemble.n_learners)

    surrogate = np.empty(config.epochs + 1)
    train_ci = np.empty(config.epochs + 1)
    m = np.zeros_like(raw)
    v = np.zeros_like(raw)
    for epoch in range(config.epochs):
        value, grad = obj.value_and_grad(raw)
        surrogate[epoch] = value
        train_ci[epoch] = float(np.mean(obj.pair_margins(raw) > 0))
        if epoch_callback is not None:
            epoch_callback(epoch, raw)
        m = config.adam_beta1 * m + (1 - config.adam_beta1) * grad
        v = config.adam_beta2 * v + (1 - config.adam_beta2) * grad**2
        mhat = m / (1 - config.adam_beta1 ** (epoch + 1))
        vhat = v / (1 - config.adam_beta2 ** (epoch + 1))
        raw = raw + config.step_size * mhat / (np.sqrt(vhat) + config.adam_eps)

    value, _ = obj.value_and_grad(raw)
    surrogate[config.epochs] = value
    train_ci[config.epochs] = float(np.mean(obj.pair_margins(raw) > 0))
    if epoch_callback is not None:
        epoch_callback(config.epochs, raw)
    history = (
        TrainHistory(surrogate, train_ci) if config.record_history else None
    )
    return AttentionParams(raw), history


@dataclass(frozen=True)
class SearchSpace:
    """Hyperparameter grids and ranges for random search."""

    tau_grid: tuple[float, ...] = (1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
    epsilon_range: tuple[float, float] = (0.0, 1.0)
    lam_grid: tuple[float, ...] = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
    phi_grid: tuple[float, ...] = (1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
    fraction_range: tuple[float, float] = (0.1, 0.7)
    learners_range: tuple[int, int] = (5, 50)
    step_grid: tuple[float, ...] = (1e-3, 1e-2, 1e-1)

    def __post_init__(self):
        for name in ("tau_grid", "lam_grid", "phi_grid", "step_grid"):
            if len(getattr(self, name)) == 0:
                raise InvalidValue(f"{name} must be non-empty")


def _sample_hp(rng, space: SearchSpace, kind: str) -> dict:
    hp = {"tau": float(rng.choice(space.tau_grid))}
    if kind == "single-beran":
        return hp
    lo, hi = space.learners_range
    hp["n_learners"] = int(rng.integers(lo, hi + 1))
    hp["fraction"] = float(rng.uniform(*space.fraction_range))
    if kind == "survbesa":
        hp["step_size"] = float(rng.choice(space.step_grid))
    elif kind == "survbesa-contam":
        hp["epsilon"] = float(rng.uniform(*space.epsilon_range))
        hp["phi"] = float(rng.choice(space.phi_grid))
        hp["lam"] = float(rng.choice(space.lam_grid))
        hp["step_size"] = float(rng.choice(space.step_grid))
    return hp


@dataclass(frozen=True)
class FittedModel:
    kind: str
    ensemble: EnsembleModel
    attention: AttentionParams | None = None
    contamination: ContaminationParams | None = None
    history: TrainHistory | None = None


def fit_model(
    data: SurvivalDataset,
    kind: str,
    hp: dict,
    seed: int,
    epochs: int = 100,
    solver_steps: int = 200,
) -> FittedModel:
    """Fit one of the four model kinds with the given hyperparameters.

    hp keys: tau always; n_learners/fraction except for single-beran;
    step_size for the trained kinds; epsilon/phi/lam for the contaminated one.
    """
    if kind not in MODEL_KINDS:
        raise InvalidValue(f"unknown model kind {kind!r}")
    if kind == "single-beran":
        ensemble = fit_ensemble(data, 1, 1.0, hp["tau"], seed)
        return FittedModel(kind, ensemble)
    ensemble = fit_ensemble(data, hp["n_learners"], hp["fraction"], hp["tau"], seed)
    if kind == "bagging":
        return FittedModel(kind, ensemble)
    if kind == "survbesa":
        config = TrainConfig(
            epochs=epochs, step_size=hp.get("step_size", 0.1), seed=seed
        )
        params, history = train_general(ensemble, data, config)
        return FittedModel(kind, ensemble, attention=params, history=history)
    contexts = contexts_for(ensemble, data.X)
    pairs = comparable_pairs(data)
    problem = precompute_qg(contexts, pairs, hp["epsilon"], hp["phi"], hp["lam"])
    result = solve_contamination(
        problem, steps=solver_steps, step_size=hp.get("step_size", 0.1)
    )
    params = ContaminationParams(hp["epsilon"], hp["phi"], result.theta)
    return FittedModel(kind, ensemble, contamination=params)


def _attended_expected_times(model: FittedModel, X) -> np.ndarray:
    contexts = contexts_for(model.ensemble, X)
    out = np.empty(len(contexts))
    for i, ctx in enumerate(contexts):
        if model.kind == "survbesa":
            beta = attention_matrix(ctx.dist, model.attention.theta)
        else:
            beta = contaminated_matrix(ctx.dist, model.contamination)
        agg = (beta @ ctx.values).mean(axis=0)
        out[i] = step_expected_times(ctx.grid, agg)
    return out


def predict_expected_times(model: FittedModel, X) -> np.ndarray:
    """Point predictions: expected time of each query's final curve."""
    if model.kind in ("single-beran", "bagging"):
        values = predict_bagging_batch(model.ensemble, X)
        return np.asarray(
            step_expected_times(model.ensemble.global_grid, values), dtype=float
        )
    return _attended_expected_times(model, X)


@dataclass(frozen=True)
class TuneResult:
    best_hp: dict
    best_score: float
    trials: list[dict] = field(repr=False)


def tune(
    train_data: SurvivalDataset,
    validation_data: SurvivalDataset,
    space: SearchSpace,
    budget: int,
    seed: int,
    kind: str = "survbesa",
    epochs: int = 100,
    solver_steps: int = 200,
) -> TuneResult:
    """Seeded random search; returns the first configuration attaining the
    best validation C-index, plus the full trial log.

    single-beran has one discrete axis, so its trials enumerate the tau grid
    instead of sampling it.  Trials that fail with a model error score -inf
    and stay in the log.
    """
    if budget < 1:
        raise InvalidValue(f"budget must be >= 1, got {budget}")
    if kind not in MODEL_KINDS:
        raise InvalidValue(f"unknown model kind {kind!r}")
    root = np.random.SeedSequence(seed)
    sampler = np.random.default_rng(root.spawn(1)[0])
    fit_seeds = [s.generate_state(1)[0] for s in root.spawn(budget + 1)[1:]]

    trials: list[dict] = []
    best_hp, best_score = None, -np.inf
    last_error: SurvBesaError | None = None
    for t in range(budget):
        if kind == "single-beran":
            if t >= len(space.tau_grid):
                break
            hp = {"tau": float(space.tau_grid[t])}
        else:
            hp = _sample_hp(sampler, space, kind)
        try:
            fitted = fit_model(
                train_data, kind, hp, int(fit_seeds[t]), epochs, solver_steps
            )
            predicted = predict_expected_times(fitted, validation_data.X)
            score = c_index(predicted, validation_data)
        except SurvBesaError as err:
            score, last_error = -np.inf, err
        trials.append({"trial": t, **hp, "validation_c_index": score})
        if score > best_score:
            best_hp, best_score = hp, score
    if best_hp is None:
        raise last_error if last_error is not None else InvalidValue("no trials ran")
    return TuneResult(best_hp, float(best_score), trials)
