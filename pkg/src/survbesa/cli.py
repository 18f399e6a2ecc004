"""Command-line harness: dataset IO, splitting, and experiment drivers.

Commands: synth (write a generated dataset), fit/eval (single model round
trip), benchmark (tune + test over repetitions), sweep (one parameter over
a grid), curve (per-epoch training curves), sfdump (component curves before
and after attention), tune (search log only).

Exit codes: 0 success, 1 usage error, 2 data/model error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import pickle
import sys
from dataclasses import dataclass, replace

import numpy as np

from .attention import (
    AttentionParams,
    adjust_sfs,
    attention_matrix,
    context_score,
    contexts_for,
    theta_from_raw,
)
from .core import SurvivalDataset
from .ensemble import fit_ensemble
from .errors import (
    DegenerateSplit,
    InvalidValue,
    MissingColumn,
    NonFiniteObjective,
    ParseError,
    SurvBesaError,
)
from .metrics import c_index
from .synth import SynthConfig, gen_dataset
from .train import (
    MODEL_KINDS,
    SearchSpace,
    TrainConfig,
    fit_model,
    predict_expected_times,
    train_general,
    tune,
)

DEFAULT_FRACTIONS = (0.6, 0.2, 0.2)
# benchmark repetition defaults: real data reuses one file many times,
# synthetic draws fresh datasets, so fewer repetitions suffice
DEFAULT_REPS_REAL = 100
DEFAULT_REPS_SYNTH = 25
SYNTH_SIZES = (200, 100, 100)  # train / validation / test draws


# ---------------------------------------------------------------------------
# dataset IO

def load_csv(path) -> SurvivalDataset:
    """Read the standard dataset layout: f* feature columns, time, event."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        feature_cols = [c for c in header if c.startswith("f")]
        for required in ("time", "event"):
            if required not in header:
                raise MissingColumn(f"{path}: no '{required}' column")
        if not feature_cols:
            raise MissingColumn(f"{path}: no feature columns (named f*)")
        idx = {c: header.index(c) for c in feature_cols + ["time", "event"]}

        X, times, events = [], [], []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}"
                )
            try:
                X.append([float(row[idx[c]]) for c in feature_cols])
                times.append(float(row[idx["time"]]))
                events.append(float(row[idx["event"]]))
            except ValueError as exc:
                raise ParseError(f"{path}: row {rownum}: {exc}") from None
    return SurvivalDataset(np.asarray(X), times, events)


def write_csv(path, data: SurvivalDataset):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(data.d)] + ["time", "event"])
        for i in range(data.n):
            writer.writerow(
                [repr(float(v)) for v in data.X[i]]
                + [repr(float(data.times[i])), int(data.events[i])]
            )


# ---------------------------------------------------------------------------
# splitting and standardization

@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # per-feature std; zero-variance features keep scale 1

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


def split_sizes(n: int, fractions) -> list[int]:
    """Floor each share, then hand leftover records to the largest remainders."""
    fractions = [float(f) for f in fractions]
    if any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidValue(f"fractions must be positive and sum to 1, got {fractions}")
    raw = [f * n for f in fractions]
    sizes = [math.floor(r) for r in raw]
    remainders = np.asarray(raw) - np.asarray(sizes)
    for i in np.argsort(-remainders, kind="stable")[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def split_standardize(data: SurvivalDataset, fractions, seed):
    """Random split plus train-fitted feature standardization.

    Returns (train, validation, test, standardizer); the transform is fitted
    on the training features only and applied to all three splits.
    """
    sizes = split_sizes(data.n, fractions)
    if any(s == 0 for s in sizes):
        raise DegenerateSplit(f"split sizes {sizes} include an empty split")
    perm = np.random.default_rng(seed).permutation(data.n)
    bounds = np.cumsum(sizes)[:-1]
    parts = np.split(perm, bounds)
    if data.events[parts[0]].sum() < 1:
        raise DegenerateSplit("training split has no uncensored records")

    train_X = data.X[parts[0]]
    mean = train_X.mean(axis=0)
    std = train_X.std(axis=0)
    scaler = Standardizer(mean, np.where(std > 0, std, 1.0))
    out = [
        SurvivalDataset(scaler.apply(data.X[p]), data.times[p], data.events[p])
        for p in parts
    ]
    return out[0], out[1], out[2], scaler


# ---------------------------------------------------------------------------
# experiment configuration and drivers

@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    seed: int
    reps: int
    budget: int = 50
    epochs: int = 100
    solver_steps: int = 200
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    data_path: str | None = None  # None means synthetic
    synth: SynthConfig | None = None
    synth_sizes: tuple[int, int, int] = SYNTH_SIZES
    space: SearchSpace = SearchSpace()

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise InvalidValue(f"unknown model kind {self.model!r}")
        if self.reps < 1:
            raise InvalidValue(f"repetitions must be >= 1, got {self.reps}")


def _rep_streams(seed: int, reps: int):
    return np.random.SeedSequence(seed).spawn(reps)


def _synth_splits(config: ExperimentConfig, stream):
    keys = [int(s.generate_state(1)[0]) for s in stream.spawn(3)]
    n_train, n_val, n_test = config.synth_sizes
    train = gen_dataset(replace(config.synth, n=n_train, seed=keys[0]))
    val = gen_dataset(replace(config.synth, n=n_val, seed=keys[1]))
    test = gen_dataset(replace(config.synth, n=n_test, seed=keys[2]))
    return train, val, test


def _one_repetition(config: ExperimentConfig, data, stream) -> dict:
    """Tune on train/validation, refit the winner, score the test split."""
    keys = [int(s.generate_state(1)[0]) for s in stream.spawn(3)]
    if config.data_path is None:
        train, val, test = _synth_splits(config, stream)
    else:
        train, val, test, _ = split_standardize(data, config.fractions, keys[0])
    result = tune(
        train,
        val,
        config.space,
        config.budget,
        keys[1],
        kind=config.model,
        epochs=config.epochs,
        solver_steps=config.solver_steps,
    )
    fitted = fit_model(
        train, config.model, result.best_hp, keys[2], config.epochs, config.solver_steps
    )
    score = c_index(predict_expected_times(fitted, test.X), test)
    return {"c_index": score, **result.best_hp}


def _outfile(outdir: str, name: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    return os.path.join(outdir, name)


def run_benchmark(config: ExperimentConfig, outdir) -> dict:
    data = load_csv(config.data_path) if config.data_path else None
    rows = []
    for rep, stream in enumerate(_rep_streams(config.seed, config.reps)):
        rows.append({"rep": rep, **_one_repetition(config, data, stream)})

    fields = sorted({k for row in rows for k in row} - {"rep", "c_index"})
    with open(_outfile(outdir, "repetitions.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["rep", "c_index"] + fields)
        writer.writeheader()
        writer.writerows(rows)

    scores = np.array([row["c_index"] for row in rows])
    summary = {
        "model": config.model,
        "repetitions": config.reps,
        "seed": config.seed,
        "mean_c_index": float(scores.mean()),
        "std_c_index": float(scores.std(ddof=1)) if config.reps > 1 else 0.0,
    }
    with open(_outfile(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


SWEEP_PARAMS = ("k", "points", "p", "learners", "fraction", "c")


def default_sweep_grid(param: str) -> list[float]:
    if param == "k":
        return [float(v) for v in range(1, 20, 2)]
    if param == "points":
        return [50.0, 100.0, 200.0, 300.0, 400.0, 500.0]
    if param == "p":
        return [round(v, 10) for v in np.linspace(0.1, 0.9, 10)]
    if param == "learners":
        return [float(v) for v in range(1, 32, 4)]
    if param == "fraction":
        return [round(v, 10) for v in np.linspace(0.1, 0.9, 9)]
    if param == "c":
        return [round(v, 10) for v in np.linspace(0.1, 6.0, 10)]
    raise InvalidValue(f"unknown sweep parameter {param!r}")


def _apply_sweep_value(config: ExperimentConfig, param: str, value: float):
    """One grid point: adjust either the generator or the search space."""
    synth, space, sizes = config.synth, config.space, config.synth_sizes
    if param == "k":
        synth = replace(synth, k=value)
    elif param == "c":
        synth = replace(synth, c=value)  # infeasible c rejected here
    elif param == "p":
        synth = replace(synth, p=value)
    elif param == "points":
        sizes = (int(value), sizes[1], sizes[2])
    elif param == "learners":
        # ensemble size pinned, subset fraction fixed at 0.4 and not tuned
        m = max(int(value), 1)
        space = replace(space, learners_range=(m, m), fraction_range=(0.4, 0.4))
    elif param == "fraction":
        space = replace(space, fraction_range=(value, value), learners_range=(25, 25))
    model = config.model
    if param == "learners" and int(value) == 1:
        model = "single-beran"  # one weak model is exactly the single estimator
    return replace(config, synth=synth, space=space, model=model, synth_sizes=sizes)


def run_sweep(config: ExperimentConfig, param: str, grid, outdir) -> list[dict]:
    rows = []
    feasible = []
    for value in grid:
        try:
            feasible.append((value, _apply_sweep_value(config, param, value)))
        except SurvBesaError as err:
            print(f"skipping {param}={value}: {err}", file=sys.stderr)
    for value, cfg in feasible:
        scores = []
        for stream in _rep_streams(cfg.seed, cfg.reps):
            scores.append(_one_repetition(cfg, None, stream)["c_index"])
        scores = np.asarray(scores)
        rows.append(
            {
                "param": param,
                "value": value,
                "mean_c_index": float(scores.mean()),
                "std_c_index": float(scores.std(ddof=1)) if len(scores) > 1 else 0.0,
                "reps": len(scores),
            }
        )
    with open(_outfile(outdir, "sweep.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["param", "value", "mean_c_index", "std_c_index", "reps"]
        )
        writer.writeheader()
        writer.writerows(rows)
    return rows


def run_curve(args) -> int:
    data = load_csv(args.data)
    train, _, test, _ = split_standardize(data, args.fractions, args.seed)
    ensemble = fit_ensemble(train, args.learners, args.fraction, args.tau, args.seed)
    test_contexts = contexts_for(ensemble, test.X)

    test_curve = []

    def callback(epoch, raw):
        theta = theta_from_raw(raw)
        scores = [context_score(ctx, theta) for ctx in test_contexts]
        test_curve.append(c_index(scores, test))

    config = TrainConfig(epochs=args.epochs, step_size=args.step_size, seed=args.seed)
    _, history = train_general(ensemble, train, config, epoch_callback=callback)

    outpath = _outfile(args.outdir, "curve.csv")
    with open(outpath, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "surrogate", "train_c_index", "test_c_index"])
        for e in range(args.epochs + 1):
            writer.writerow(
                [e, history.surrogate[e], history.train_c_index[e], test_curve[e]]
            )
    print(outpath)
    return 0


def run_sfdump(args) -> int:
    data = load_csv(args.data)
    if not (0 <= args.query_index < data.n):
        raise InvalidValue(
            f"query index {args.query_index} outside dataset of {data.n} records"
        )
    hp = {
        "tau": args.tau,
        "n_learners": args.learners,
        "fraction": args.fraction,
        "step_size": args.step_size,
    }
    fitted = fit_model(data, "survbesa", hp, args.seed, epochs=args.epochs)
    ctx = contexts_for(fitted.ensemble, data.X[args.query_index : args.query_index + 1])[0]

    stages = {
        "raw": [  # the component curves themselves
            row for row in ctx.values
        ],
        "attended-initial": [
            sf.values
            for sf in adjust_sfs(
                ctx, attention_matrix(ctx.dist, AttentionParams.initial(ctx.n_learners).theta)
            )
        ],
        "attended-trained": [
            sf.values
            for sf in adjust_sfs(ctx, attention_matrix(ctx.dist, fitted.attention.theta))
        ],
    }
    outpath = _outfile(args.outdir, "sfdump.csv")
    with open(outpath, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "learner", "t", "value"])
        for stage, curves in stages.items():
            for k, values in enumerate(curves):
                for t, v in zip(ctx.grid, values):
                    writer.writerow([stage, k, repr(float(t)), repr(float(v))])
    print(outpath)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_synth_flags(p, with_n=True):
    if with_n:
        p.add_argument("--n", type=int, default=200)
    p.add_argument("--p", type=float, default=0.2, help="uncensored probability")
    p.add_argument("--c", type=float, default=3.0)
    p.add_argument("--k", type=float, default=6.0)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--lower", type=float, default=-2.0)
    p.add_argument("--upper", type=float, default=5.0)
    p.add_argument(
        "--censored-time-mode", choices=("keep", "uniform"), default="keep"
    )


def _synth_from_args(args, n=None, seed=0) -> SynthConfig:
    return SynthConfig(
        n=n if n is not None else args.n,
        d=args.d,
        lower=args.lower,
        upper=args.upper,
        p=args.p,
        c=args.c,
        k=args.k,
        seed=seed,
        censored_time_mode=args.censored_time_mode,
    )


def _add_model_flags(p):
    p.add_argument("--model", choices=MODEL_KINDS, default="survbesa")
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--solver-steps", type=int, default=200)


def _add_hp_flags(p):
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--learners", type=int, default=10)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=100)


def _fractions(text) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="survbesa",
        description="Ensembles of kernel survival estimators with attention aggregation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a dataset CSV")
    _add_synth_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit one model and pickle it")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=MODEL_KINDS, default="survbesa")
    _add_hp_flags(p)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--phi", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--solver-steps", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="score a pickled model on a dataset")
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="tune + test over repetitions")
    p.add_argument("--data", help="dataset CSV; omit to use synthetic data")
    _add_synth_flags(p, with_n=False)
    _add_model_flags(p)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--split", type=_fractions, default=DEFAULT_FRACTIONS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sweep", help="vary one parameter over a grid")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--grid", help="comma-separated values; default per parameter")
    _add_synth_flags(p, with_n=False)
    _add_model_flags(p)
    p.add_argument("--reps", type=int, default=DEFAULT_REPS_SYNTH)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("curve", help="per-epoch training curves")
    p.add_argument("--data", required=True)
    _add_hp_flags(p)
    p.add_argument("--split", dest="fractions", type=_fractions, default=DEFAULT_FRACTIONS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=run_curve)

    p = sub.add_parser("sfdump", help="component curves before/after attention")
    p.add_argument("--data", required=True)
    p.add_argument("--query-index", type=int, default=0)
    _add_hp_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=run_sfdump)

    p = sub.add_parser("tune", help="hyperparameter search, log only")
    p.add_argument("--train", required=True)
    p.add_argument("--validation", required=True)
    _add_model_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="trial log CSV")
    p.set_defaults(func=cmd_tune)

    return parser


def cmd_synth(args) -> int:
    data = gen_dataset(_synth_from_args(args, seed=args.seed))
    write_csv(args.out, data)
    print(args.out)
    return 0


def cmd_fit(args) -> int:
    data = load_csv(args.data)
    hp = {
        "tau": args.tau,
        "n_learners": args.learners,
        "fraction": args.fraction,
        "step_size": args.step_size,
        "epsilon": args.epsilon,
        "phi": args.phi,
        "lam": args.lam,
    }
    fitted = fit_model(
        data, args.model, hp, args.seed, epochs=args.epochs, solver_steps=args.solver_steps
    )
    with open(args.out, "wb") as fh:
        pickle.dump(fitted, fh)
    print(json.dumps({"model": args.model, "out": args.out, "n": data.n}))
    return 0


def cmd_eval(args) -> int:
    with open(args.model_file, "rb") as fh:
        fitted = pickle.load(fh)
    data = load_csv(args.data)
    predicted = predict_expected_times(fitted, data.X)
    print(json.dumps({"c_index": c_index(predicted, data), "n": data.n}))
    return 0


def cmd_benchmark(args) -> int:
    reps = args.reps
    if reps is None:
        reps = DEFAULT_REPS_REAL if args.data else DEFAULT_REPS_SYNTH
    config = ExperimentConfig(
        model=args.model,
        seed=args.seed,
        reps=reps,
        budget=args.budget,
        epochs=args.epochs,
        solver_steps=args.solver_steps,
        fractions=tuple(args.split),
        data_path=args.data,
        synth=None if args.data else _synth_from_args(args, n=SYNTH_SIZES[0]),
    )
    summary = run_benchmark(config, args.outdir)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_sweep(args) -> int:
    grid = (
        [float(v) for v in args.grid.split(",")]
        if args.grid
        else default_sweep_grid(args.param)
    )
    config = ExperimentConfig(
        model=args.model,
        seed=args.seed,
        reps=args.reps,
        budget=args.budget,
        epochs=args.epochs,
        solver_steps=args.solver_steps,
        synth=_synth_from_args(args, n=SYNTH_SIZES[0]),
    )
    rows = run_sweep(config, args.param, grid, args.outdir)
    print(f"{os.path.join(args.outdir, 'sweep.csv')} ({len(rows)} rows)")
    return 0


def cmd_tune(args) -> int:
    train = load_csv(args.train)
    val = load_csv(args.validation)
    result = tune(
        train,
        val,
        SearchSpace(),
        args.budget,
        args.seed,
        kind=args.model,
        epochs=args.epochs,
        solver_steps=args.solver_steps,
    )
    fields = sorted({k for t in result.trials for k in t} - {"trial", "validation_c_index"})
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["trial"] + fields + ["validation_c_index"])
        writer.writeheader()
        writer.writerows(result.trials)
    print(json.dumps({"best": result.best_hp, "validation_c_index": result.best_score}))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return int(args.func(args) or 0)
    except NonFiniteObjective as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 3
    except SurvBesaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
