"""Ensembles of kernel survival estimators with attention aggregation."""

from .attention import (
    AttentionContext,
    AttentionParams,
    SurrogateObjective,
    adjust_sfs,
    aggregate_sf,
    attention_matrix,
    contexts_for,
    predict_attended,
    r_value,
)
from .beran import BeranModel, beran_predict, fit_beran, kernel_weights
from .contamination import (
    ContaminationParams,
    ContaminationProblem,
    contaminated_matrix,
    contaminated_weights,
    hinge_objective,
    precompute_qg,
    project_row_simplex,
    solve_contamination,
)
from .core import (
    StepSurvivalFunction,
    SurvivalDataset,
    SurvivalRecord,
    expected_time,
    ks_distance,
    rebase_to_grid,
    sf_eval,
    validate_dataset,
)
from .ensemble import (
    EnsembleModel,
    fit_ensemble,
    predict_bagging,
    predict_component_sfs,
)
from .errors import SurvBesaError
from .metrics import c_index, comparable_pairs, paired_t_test
from .synth import SynthConfig, gen_dataset, gen_event_time
from .train import (
    FittedModel,
    SearchSpace,
    TrainConfig,
    fit_model,
    predict_expected_times,
    train_general,
    tune,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionContext",
    "AttentionParams",
    "BeranModel",
    "ContaminationParams",
    "ContaminationProblem",
    "EnsembleModel",
    "FittedModel",
    "SearchSpace",
    "StepSurvivalFunction",
    "SurrogateObjective",
    "SurvBesaError",
    "SurvivalDataset",
    "SurvivalRecord",
    "SynthConfig",
    "TrainConfig",
    "adjust_sfs",
    "aggregate_sf",
    "attention_matrix",
    "beran_predict",
    "c_index",
    "comparable_pairs",
    "contaminated_matrix",
    "contaminated_weights",
    "contexts_for",
    "expected_time",
    "fit_beran",
    "fit_ensemble",
    "fit_model",
    "gen_dataset",
    "gen_event_time",
    "hinge_objective",
    "kernel_weights",
    "ks_distance",
    "paired_t_test",
    "precompute_qg",
    "predict_attended",
    "predict_bagging",
    "predict_component_sfs",
    "predict_expected_times",
    "project_row_simplex",
    "r_value",
    "rebase_to_grid",
    "sf_eval",
    "solve_contamination",
    "train_general",
    "tune",
    "validate_dataset",
]
