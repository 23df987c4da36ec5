# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""acebench 명령행.

    acebench generate base5 --n 1000 --out base5.csv
    acebench ace --data base5.csv --model rf
    acebench benchmark --scenario collinear09 --models ols,rf,gbt,nn
    acebench tune --model nn --scenario datapoor --n 100
    acebench casestudy --n-train 2000 --n-test 2000
    acebench trace --kind boost --scenario confounder09
    acebench replay out/base5.manifest.json

종료 코드: 0 성공(부분 실패 포함), 2 사용법 오류, 3 IO 오류.
모든 명령은 출력 옆에 JSON manifest 를 남기고, replay 로 같은 출력을 다시 만든다.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from . import __version__
from .ace import ace, add_interaction_columns, interaction_ace, standardize, weighted_ace
from .config import settings
from .errors import (
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    AceBenchError,
    DivergedLoss,
    InvalidData,
    NotConverged,
    RankDeficient,
    UsageError,
)
from .experiments import resolve_threads
from .experiments.benchmark import benchmark
from .experiments.casestudy import case_study_eval
from .experiments.traces import booster_trace_frame, boosting_trace, nn_trace
from .experiments.tuning import TARGETS, random_search, surrogate_select
from .export import RunManifest, manifest_path, read_csv, read_manifest, write_csv, write_manifest, write_xlsx
from .learners import LinearModel, config_fields, fit_learner, resolve_learner
from .learners.base import Dataset
from .randkit import split_rng
from .scenarios import CaseStudySpec, ScenarioSpec, generate, resolve_scenario, spec_to_dict

logger = logging.getLogger(__name__)

FIT_FAILURES = (RankDeficient, NotConverged, DivergedLoss)


# ------------------------------------------------------------------
# 공통 헬퍼
# ------------------------------------------------------------------

def _default(value, fallback):
    """0 은 그대로 두고 None 만 기본값으로 바꾼다."""
    return fallback if value is None else value


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _parse_pairs(value: Optional[str]) -> list[tuple[int, int]]:
    """'1,2;3,4' -> [(0, 1), (2, 3)]. 명령행에서는 1부터 센다."""
    if not value:
        return []
    pairs = []
    for chunk in value.split(";"):
        parts = _split_list(chunk)
        if len(parts) != 2:
            raise UsageError(f"Interaction pair must look like 'm,k', got '{chunk}'")
        try:
            a, b = (int(p) - 1 for p in parts)
        except ValueError:
            raise UsageError(f"Interaction pair must be integers, got '{chunk}'") from None
        if a < 0 or b < 0:
            raise UsageError(f"Feature numbers start at 1, got '{chunk}'")
        pairs.append((a, b))
    return pairs


def _load_params(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: learner config must be a mapping")
    return data.get("params", data)


def _learners(names: str, config: Optional[str] = None) -> list:
    """config 는 모든 학습기에 공통. 각 학습기는 자기 config 가 아는 키만 받는다."""
    params = _load_params(config)
    specs = [resolve_learner(name) for name in _split_list(names)]
    if not params:
        return specs
    known = set().union(*(config_fields(s.kind) for s in specs))
    unknown = sorted(set(params) - known)
    if unknown:
        raise UsageError(f"{config}: no selected learner takes {', '.join(unknown)}")
    return [
        resolve_learner(s, {k: v for k, v in params.items() if k in config_fields(s.kind)})
        for s in specs
    ]


def _manifest(args, argv: Sequence[str], scenario=None, learners=(), outputs=()) -> RunManifest:
    return RunManifest(
        command=args.command,
        argv=list(argv),
        master_seed=args.seed,
        threads=resolve_threads(args.threads),
        scenario=spec_to_dict(scenario) if scenario is not None else None,
        learners=[lr.model_dump(mode="json") for lr in learners],
        outputs=[str(p) for p in outputs],
    )


def _dataset_from_csv(path: str) -> Dataset:
    df = read_csv(path)
    if df.shape[1] < 2:
        raise InvalidData(f"{path}: need at least one feature column and a response column")
    target = "y" if "y" in df.columns else df.columns[-1]
    features = [c for c in df.columns if c != target]
    try:
        X = df[features].to_numpy(dtype=np.float64)
        y = df[target].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidData(f"{path}: non-numeric data ({e})") from e
    return Dataset(X, y, tuple(str(c) for c in features))


# ------------------------------------------------------------------
# 명령
# ------------------------------------------------------------------

def cmd_generate(args, argv) -> int:
    spec = resolve_scenario(args.scenario)
    n = _default(args.n, spec.n_default)
    d = generate(spec, n, split_rng(args.seed, 0))
    df = pd.DataFrame(d.X, columns=list(d.feature_names))
    df["y"] = d.y
    out = Path(args.out or f"{spec.name}.csv")
    write_csv(df, out)
    write_manifest(_manifest(args, argv, scenario=spec, outputs=[out]), manifest_path(out))
    return EXIT_OK


def cmd_ace(args, argv) -> int:
    d = _dataset_from_csv(args.data)
    learner = resolve_learner(args.model, _load_params(args.config))
    pairs = _parse_pairs(args.interactions)
    for a, b in pairs:
        if max(a, b) >= d.p:
            raise UsageError(f"Interaction ({a + 1},{b + 1}) outside {d.p} features")

    X = d.X
    if args.standardize:
        X, _ = standardize(X)
    names = d.feature_names
    engineered = args.engineer_interactions and bool(pairs)
    if engineered:
        X, names = add_interaction_columns(X, pairs, names)
    train = Dataset(X, d.y, names)

    rows = []
    try:
        model = fit_learner(learner, train, split_rng(args.seed, 0))
    except FIT_FAILURES as e:
        logger.warning(f"{learner.name} failed to fit: {type(e).__name__}: {e.detail}")
        for name in names:
            kind = "interaction" if ":" in name else "main"
            rows.append((kind, name, np.nan, np.nan, np.nan, args.weighted and kind == "main", True))
        model = None

    if model is not None:
        coef = model.coefficients if isinstance(model, LinearModel) else None
        report = ace(model, train.X, h_fraction=args.h_fraction)
        for j, name in enumerate(names):
            kind = "interaction" if engineered and j >= d.p else "main"
            value = float(report.ace[j])
            is_weighted = False
            if args.weighted and kind == "main":
                value = float(weighted_ace(
                    model, train.X, j, h_fraction=args.h_fraction,
                    density_floor_fraction=args.density_floor, bandwidth=args.bandwidth,
                ).ace[0])
                is_weighted = True
            raw = float(coef[j]) if coef is not None else np.nan
            rows.append((kind, name, value, float(report.h[j]), raw, is_weighted, False))
        if not engineered:
            for a, b in pairs:
                rep = interaction_ace(model, train.X, (a, b), h_fraction=args.h_fraction)
                rows.append(("interaction", f"{names[a]}:{names[b]}", rep.value, np.nan, np.nan, False, False))

    df = pd.DataFrame(rows, columns=["kind", "feature", "ace", "h", "coefficient", "weighted", "failed"])
    out = Path(args.out or "effects.csv")
    write_csv(df, out)
    write_manifest(_manifest(args, argv, learners=[learner], outputs=[out]), manifest_path(out))
    return EXIT_OK


def cmd_benchmark(args, argv) -> int:
    spec = resolve_scenario(args.scenario)
    learners = _learners(args.models, args.config)
    n = _default(args.n, spec.n_default)
    R = _default(args.replicates, settings.replicates)
    out_dir = Path(args.out_dir)
    results = benchmark(spec, learners, n, R, args.seed, threads=args.threads, weighted=args.weighted)

    outputs, long_frames, sheets = [], [], {}
    for name, (run, report) in results.items():
        table = report.to_frame()
        outputs.append(write_csv(table, out_dir / f"{spec.name}_{name}.csv"))
        outputs.append(write_csv(run.to_frame(), out_dir / f"{spec.name}_{name}_replicates.csv"))
        long_frames.append(report.to_long(spec.name, name))
        sheets[name] = table
        if report.degenerate:
            logger.warning(f"{name}: degenerate report (successful replicates={report.n_replicates})")
    combined = out_dir / f"{spec.name}_long.csv"
    long_df = pd.concat(long_frames, ignore_index=True)
    outputs.append(write_csv(long_df, combined))
    if args.xlsx:
        sheets["long"] = long_df
        outputs.append(write_xlsx(sheets, out_dir / f"{spec.name}.xlsx"))
    write_manifest(_manifest(args, argv, spec, learners, outputs), manifest_path(combined))
    return EXIT_OK


def cmd_tune(args, argv) -> int:
    spec = resolve_scenario(args.scenario)
    if not isinstance(spec, ScenarioSpec):
        raise UsageError("tune needs a linear scenario with known effects")
    kind = resolve_learner(args.model).kind
    n = _default(args.n, spec.n_default)
    draws = _default(args.draws, settings.search_draws)
    reps = _default(args.reps, settings.search_reps)
    out_dir = Path(args.out_dir)

    result = random_search(kind, draws, reps, spec, n, args.seed, threads=args.threads)
    optima = {target: surrogate_select(result, target) for target in TARGETS}

    table_path = write_csv(result.table, out_dir / f"tune_{kind.value}.csv")
    optima_path = out_dir / f"tune_{kind.value}_optima.json"
    with open(optima_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {t: {"draw": s.draw, "params": s.params} for t, s in optima.items()},
            f, indent=2, sort_keys=True,
        )
        f.write("\n")
    outputs = [table_path, optima_path]
    if args.xlsx:
        optima_df = pd.DataFrame([{"target": t, "draw": s.draw, **s.params} for t, s in optima.items()])
        outputs.append(write_xlsx({"search": result.table, "optima": optima_df}, out_dir / f"tune_{kind.value}.xlsx"))
    write_manifest(_manifest(args, argv, spec, outputs=outputs), manifest_path(table_path))
    return EXIT_OK


def cmd_casestudy(args, argv) -> int:
    spec = resolve_scenario(args.scenario)
    if not isinstance(spec, CaseStudySpec):
        raise UsageError(f"'{args.scenario}' is not a case-study scenario")
    learners = _learners(args.models, args.config)
    table = case_study_eval(learners, spec, args.n_train, args.n_test, args.seed, threads=args.threads)
    out = Path(args.out or "casestudy.csv")
    outputs = [write_csv(table, out)]
    if args.xlsx:
        outputs.append(write_xlsx({"casestudy": table}, out.with_suffix(".xlsx")))
    write_manifest(_manifest(args, argv, spec, learners, outputs), manifest_path(out))
    return EXIT_OK


def cmd_trace(args, argv) -> int:
    default = "confounder09" if args.kind == "boost" else "collinear09"
    spec = resolve_scenario(args.scenario or default)
    if not isinstance(spec, ScenarioSpec):
        raise UsageError("trace needs a linear scenario")
    if args.kind == "boost":
        trace = boosting_trace(spec, args.n, args.steps, args.eta, args.seed)
        table = booster_trace_frame(trace, spec.feature_names)
        learners = [resolve_learner("linear_booster", {"n_steps": args.steps, "eta": args.eta})]
    else:
        params = _load_params(args.config)
        if args.epochs is not None:
            params["epochs"] = args.epochs
        learner = resolve_learner("nn", params)
        table = nn_trace(spec, args.n, learner.config(), args.seed)
        learners = [learner]
    out = Path(args.out or f"trace_{args.kind}.csv")
    write_csv(table, out)
    write_manifest(_manifest(args, argv, spec, learners, [out]), manifest_path(out))
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    manifest = read_manifest(args.manifest)
    if manifest.command == "replay":
        raise UsageError("Refusing to replay a replay manifest")
    logger.info(f"Replaying '{manifest.command}' from {args.manifest} (recorded with {manifest.version})")
    return main(manifest.argv)


COMMANDS = {
    "generate": cmd_generate,
    "ace": cmd_ace,
    "benchmark": cmd_benchmark,
    "tune": cmd_tune,
    "casestudy": cmd_casestudy,
    "trace": cmd_trace,
    "replay": cmd_replay,
}


# ------------------------------------------------------------------
# parser
# ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ACEBENCH_THREADS={settings.threads})")
    common.add_argument("--log-level", default=None, help=f"logging level (default {settings.log_level})")

    parser = argparse.ArgumentParser(prog="acebench", description="Average conditional effects benchmark")
    parser.add_argument("--version", action="version", version=f"acebench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="simulate a dataset to CSV")
    p.add_argument("scenario", help="builtin scenario name or YAML file")
    p.add_argument("--n", type=int, default=None, help="rows (default: scenario n_default)")
    p.add_argument("--out", default=None, help="output CSV (default <scenario>.csv)")

    p = sub.add_parser("ace", parents=[common], help="fit a learner on a CSV and report effects")
    p.add_argument("--data", required=True, help="CSV with feature columns and a 'y' column")
    p.add_argument("--model", required=True, help="learner preset, e.g. ols, rf, gbt, nn")
    p.add_argument("--config", default=None, help="YAML mapping of learner parameters")
    p.add_argument("--weighted", action="store_true", help="inverse-density weighted ACE")
    p.add_argument("--density-floor", type=float, default=None,
                   help=f"density floor as a fraction of the peak (default {settings.density_floor_fraction})")
    p.add_argument("--bandwidth", type=float, default=None, help="KDE bandwidth (default: Silverman)")
    p.add_argument("--interactions", default=None, help="feature pairs, e.g. '1,2;3,4'")
    p.add_argument("--engineer-interactions", action="store_true",
                   help="append x_m*x_k columns and report their effects instead of mixed differences")
    p.add_argument("--standardize", action="store_true", help="center and scale features before fitting")
    p.add_argument("--h-fraction", type=float, default=None, help=f"step / sd (default {settings.h_fraction})")
    p.add_argument("--out", default=None, help="output CSV (default effects.csv)")

    p = sub.add_parser("benchmark", parents=[common], help="bias / variance of effects over replicates")
    p.add_argument("--scenario", required=True)
    p.add_argument("--models", default="ols,elastic_net,rf,gbt,nn", help="comma separated presets")
    p.add_argument("--config", default=None, help="YAML parameters applied to every model")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None, help=f"default {settings.replicates}")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--xlsx", action="store_true", help="also write an Excel workbook")

    p = sub.add_parser("tune", parents=[common], help="hyperparameter random search + surrogate optimum")
    p.add_argument("--model", required=True, help="nn, gbt, rf or elastic_net")
    p.add_argument("--scenario", default="datapoor")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--draws", type=int, default=None, help=f"default {settings.search_draws}")
    p.add_argument("--reps", type=int, default=None, help=f"default {settings.search_reps}")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--xlsx", action="store_true")

    p = sub.add_parser("casestudy", parents=[common], help="full vs causal feature sets, in / out of distribution")
    p.add_argument("--scenario", default="casestudy")
    p.add_argument("--models", default="rf,gbt,nn")
    p.add_argument("--config", default=None)
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=2000)
    p.add_argument("--out", default=None, help="output CSV (default casestudy.csv)")
    p.add_argument("--xlsx", action="store_true")

    p = sub.add_parser("trace", parents=[common], help="booster coefficient or NN effect trajectory")
    p.add_argument("--kind", choices=("boost", "nn"), required=True)
    p.add_argument("--scenario", default=None, help="default confounder09 (boost) / collinear09 (nn)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--steps", type=int, default=200, help="booster steps")
    p.add_argument("--eta", type=float, default=1.0, help="booster step size")
    p.add_argument("--epochs", type=int, default=None, help="NN epochs")
    p.add_argument("--config", default=None, help="YAML NN parameters")
    p.add_argument("--out", default=None)

    p = sub.add_parser("replay", parents=[common], help="re-run the command stored in a manifest")
    p.add_argument("manifest")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    level = _default(args.log_level, settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO))

    try:
        return COMMANDS[args.command](args, argv)
    except AceBenchError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"error: invalid configuration\n{e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, yaml.YAMLError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        logger.exception(f"Unexpected failure in '{args.command}'")
        return EXIT_FAILURE
