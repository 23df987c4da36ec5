# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""replicate 실행과 효과의 bias / variance / MSE.

replicate r 은 데이터에 stream r, 모형에 stream r + R 을 쓴다. holdout 은 학습
데이터와 같은 크기로 같은 Sigma 에서 새로 뽑는다. 학습 실패는 집계만 하고
실행을 멈추지 않는다.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..ace import ace, inverse_density_weights, weighted_ace
from ..errors import AceBenchError, DimensionMismatch, NoAnalyticTruth
from ..learners import LearnerSpec, fit_learner, predict
from ..randkit import split_rng
from ..scenarios import (
    CASE_STUDY_FEATURES,
    AnySpec,
    ScenarioSpec,
    draw_covariance,
    gen_linear,
    generate,
    true_effects,
)
from . import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplicateRecord:
    replicate: int
    ace: Optional[np.ndarray]        # 실패하면 None
    prediction_mse: float
    error: Optional[str] = None
    truth: Optional[np.ndarray] = None   # 이 replicate 표본에서의 참 ACE

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class ReplicateRun:
    scenario: str
    learner: str
    n: int
    master_seed: int
    features: tuple[str, ...]
    records: tuple[ReplicateRecord, ...]

    @property
    def failures(self) -> int:
        return sum(not r.ok for r in self.records)

    def estimates(self) -> np.ndarray:
        """성공한 replicate 들의 ACE, (R_ok, q)."""
        ok = [r.ace for r in self.records if r.ok]
        if not ok:
            return np.empty((0, len(self.features)))
        return np.vstack(ok)

    def prediction_mses(self) -> np.ndarray:
        return np.array([r.prediction_mse for r in self.records if r.ok])

    def mean_truth(self) -> np.ndarray:
        """성공한 replicate 들의 참 ACE 평균. 모두 실패했으면 전체 replicate 평균."""
        truths = [r.truth for r in self.records if r.ok and r.truth is not None]
        if not truths:
            truths = [r.truth for r in self.records if r.truth is not None]
        if not truths:
            return np.full(len(self.features), np.nan)
        return np.vstack(truths).mean(axis=0)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for r in self.records:
            row = {"replicate": r.replicate, "ok": r.ok, "prediction_mse": r.prediction_mse}
            for j, name in enumerate(self.features):
                row[f"ace_{name}"] = r.ace[j] if r.ok else np.nan
            for j, name in enumerate(self.features):
                row[f"truth_{name}"] = r.truth[j] if r.truth is not None else np.nan
            row["error"] = r.error or ""
            rows.append(row)
        return pd.DataFrame(rows)


@dataclass(frozen=True)
class BiasVarianceReport:
    features: tuple[str, ...]
    truth: np.ndarray
    mean_ace: np.ndarray
    bias: np.ndarray          # truth - mean(ACE), 양수면 과소추정
    variance: np.ndarray      # ddof=1, R=1 이면 0
    mse: np.ndarray           # bias^2 + variance
    prediction_mse: float
    n_replicates: int
    failures: int = 0
    degenerate: bool = False  # 성공 replicate 가 1개 이하

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "feature": list(self.features),
            "truth": self.truth,
            "mean_ace": self.mean_ace,
            "bias": self.bias,
            "variance": self.variance,
            "mse": self.mse,
            "prediction_mse": self.prediction_mse,
            "n_replicates": self.n_replicates,
            "failures": self.failures,
            "degenerate": self.degenerate,
        })

    def to_long(self, scenario: str, model: str) -> pd.DataFrame:
        """(scenario, model, feature, metric, value)."""
        rows = []
        for j, name in enumerate(self.features):
            for metric in ("mean_ace", "bias", "variance", "mse"):
                rows.append((scenario, model, name, metric, float(getattr(self, metric)[j])))
        rows.append((scenario, model, "", "prediction_mse", float(self.prediction_mse)))
        rows.append((scenario, model, "", "failures", float(self.failures)))
        return pd.DataFrame(rows, columns=["scenario", "model", "feature", "metric", "value"])


def bias_variance(
    estimates,
    truth,
    prediction_mse: float = float("nan"),
    failures: int = 0,
    features: Optional[Sequence[str]] = None,
) -> BiasVarianceReport:
    est = np.atleast_2d(np.asarray(estimates, dtype=np.float64))
    truth = np.asarray(truth, dtype=np.float64).ravel()
    p = truth.shape[0]
    if est.size == 0:
        est = est.reshape(0, p)
    if est.shape[1] != p:
        raise DimensionMismatch(f"Estimates have {est.shape[1]} columns, truth has {p} entries")
    names = tuple(features) if features else tuple(f"x{j + 1}" for j in range(p))
    R = est.shape[0]

    if R == 0:
        nan = np.full(p, np.nan)
        logger.warning(f"No successful replicates ({failures} failures); report is empty")
        return BiasVarianceReport(names, truth, nan, nan, nan, nan, float("nan"), 0, failures, True)

    mean = est.mean(axis=0)
    bias = truth - mean
    degenerate = R < 2
    if degenerate:
        logger.warning("Only one replicate: variance reported as 0")
        var = np.zeros(p)
    else:
        var = est.var(axis=0, ddof=1)
    return BiasVarianceReport(
        features=names,
        truth=truth,
        mean_ace=mean,
        bias=bias,
        variance=var,
        mse=bias ** 2 + var,
        prediction_mse=float(prediction_mse),
        n_replicates=R,
        failures=failures,
        degenerate=degenerate,
    )


def _one_replicate(
    spec: AnySpec,
    learner: LearnerSpec,
    n: int,
    R: int,
    master_seed: int,
    r: int,
    features: Optional[Sequence[int]],
    weighted: bool,
) -> ReplicateRecord:
    data_rng = split_rng(master_seed, r)
    model_rng = split_rng(master_seed, r + R)
    if isinstance(spec, ScenarioSpec):
        cov = draw_covariance(spec, data_rng)
        train = gen_linear(spec, n, data_rng, cov=cov)
        holdout = gen_linear(spec, n, data_rng, cov=cov)
    else:
        train = generate(spec, n, data_rng)
        holdout = generate(spec, n, data_rng)
    truth = None
    try:
        truth = replicate_truth(spec, train.X, features, weighted)
        model = fit_learner(learner, train, model_rng)
        if weighted:
            ks = range(train.p) if features is None else features
            est = np.array([weighted_ace(model, train.X, k).ace[0] for k in ks])
        else:
            est = ace(model, train.X, features=features).ace
        mse = float(np.mean((holdout.y - predict(model, holdout.X)) ** 2))
    except AceBenchError as e:
        logger.warning(f"{learner.name} replicate {r} failed: {type(e).__name__}: {e.detail}")
        return ReplicateRecord(r, None, float("nan"), f"{type(e).__name__}: {e.detail}", truth)
    except Exception as e:
        logger.exception(f"{learner.name} replicate {r} raised an unexpected error")
        return ReplicateRecord(r, None, float("nan"), f"{type(e).__name__}: {e}", truth)
    return ReplicateRecord(r, est, mse, truth=truth)


def run_replicates(
    spec: AnySpec,
    learner: LearnerSpec,
    n: int,
    R: int,
    master_seed: int,
    threads: Optional[int] = None,
    features: Optional[Sequence[int]] = None,
    weighted: bool = False,
) -> ReplicateRun:
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    names = _feature_names(spec)
    if features is not None:
        names = tuple(names[k] for k in features)
    logger.info(f"Running {R} replicates of {learner.name} on {spec.name} (n={n}, seed={master_seed})")
    records = parallel_map(
        lambda r: _one_replicate(spec, learner, n, R, master_seed, r, features, weighted),
        range(R),
        threads,
    )
    run = ReplicateRun(spec.name, learner.name, n, master_seed, names, tuple(records))
    if run.failures:
        logger.warning(f"{learner.name} on {spec.name}: {run.failures}/{R} replicates failed")
    return run


def _feature_names(spec: AnySpec) -> tuple[str, ...]:
    if isinstance(spec, ScenarioSpec):
        return spec.feature_names
    return CASE_STUDY_FEATURES


def truth_vector(spec: AnySpec, features: Optional[Sequence[int]] = None) -> np.ndarray:
    """선형 참값. case study 는 구조식 직접효과(lung_volume 은 0)."""
    try:
        main = true_effects(spec).main
    except NoAnalyticTruth:
        eff = spec.causal_effects
        main = np.array([eff["smoking"], eff["nutrition"], 0.0])
    return main if features is None else main[list(features)]


def replicate_truth(
    spec: AnySpec,
    X: np.ndarray,
    features: Optional[Sequence[int]] = None,
    weighted: bool = False,
) -> np.ndarray:
    """표본 X 위에서 평균한 참 기울기. weighted 면 추정량과 같은 밀도 가중치를 쓴다.

    hinge 나 교호항이 있으면 표본마다 값이 달라진다. case study 는 구조식 직접효과.
    """
    ks = list(range(X.shape[1])) if features is None else [int(k) for k in features]
    try:
        effects = true_effects(spec)
    except NoAnalyticTruth:
        return truth_vector(spec, ks)
    S = effects.slopes_at(X)
    if not weighted:
        return S[:, ks].mean(axis=0)
    return np.array([inverse_density_weights(X[:, k]) @ S[:, k] for k in ks])


def summarize(run: ReplicateRun, truth=None) -> BiasVarianceReport:
    """truth 를 주지 않으면 replicate 별 참 ACE 의 평균과 비교한다."""
    if truth is None:
        truth = run.mean_truth()
    pm = run.prediction_mses()
    return bias_variance(
        run.estimates(),
        truth,
        prediction_mse=float(pm.mean()) if pm.size else float("nan"),
        failures=run.failures,
        features=run.features,
    )


def benchmark(
    spec: AnySpec,
    learners: Sequence[LearnerSpec],
    n: int,
    R: int,
    master_seed: int,
    threads: Optional[int] = None,
    weighted: bool = False,
) -> dict[str, tuple[ReplicateRun, BiasVarianceReport]]:
    """모든 학습기가 같은 seed 즉 같은 데이터 replicate 를 본다."""
    out = {}
    for learner in learners:
        run = run_replicates(spec, learner, n, R, master_seed, threads, weighted=weighted)
        out[learner.name] = (run, summarize(run))
    return out
