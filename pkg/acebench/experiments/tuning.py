# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""하이퍼파라미터 random search 와 RF surrogate 로 최적점 선택.

draw i 의 파라미터는 derive_seed(master, 0) 스트림 i 에서 뽑고, 그 draw 의
replicate 들은 master seed derive_seed(master, 1, i) 로 돌린다. 그래서 draw 수나
thread 수가 바뀌어도 앞쪽 draw 의 결과는 변하지 않는다.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..config import settings
from ..errors import UnknownLearner
from ..learners import LearnerKind, LearnerSpec
from ..learners.base import Dataset
from ..learners.nn import ACTIVATION_NAMES
from ..learners.trees import fit_rf
from ..randkit import RngStream, derive_seed, split_rng
from ..scenarios import ScenarioSpec
from . import parallel_map
from .benchmark import run_replicates, summarize

logger = logging.getLogger(__name__)

TARGETS = ("effect_mse", "prediction_mse")


@dataclass(frozen=True)
class Param:
    name: str
    kind: Literal["float", "int", "log", "choice"]
    low: float = 0.0
    high: float = 1.0
    choices: tuple[str, ...] = ()

    def draw(self, rng: RngStream) -> Any:
        if self.kind == "choice":
            return self.choices[int(rng.integers(len(self.choices)))]
        if self.kind == "int":
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.kind == "log":
            return float(np.exp(rng.uniform(np.log(self.low), np.log(self.high))))
        return float(rng.uniform(self.low, self.high))

    def contains(self, value) -> bool:
        if self.kind == "choice":
            return value in self.choices
        if self.kind == "int" and int(value) != value:
            return False
        return self.low <= value <= self.high


SEARCH_SPACES: dict[LearnerKind, tuple[Param, ...]] = {
    LearnerKind.NEURAL_NET: (
        Param("activation", "choice", choices=ACTIVATION_NAMES),
        Param("depth", "int", 1, 8),
        Param("width", "int", 2, 50),
        Param("batch_fraction", "float", 0.01, 1.0),
        Param("penalty_lambda", "log", 2.65e-5, 0.16),
        Param("penalty_alpha", "float", 0.0, 1.0),
    ),
    LearnerKind.GBT: (
        Param("alpha_l1", "float", 0.0, 1.0),
        Param("eta", "float", 0.01, 0.4),
        Param("max_depth", "int", 2, 25),
        Param("subsample", "float", 0.5, 1.0),
        Param("n_trees", "int", 30, 125),
        Param("lambda_l2", "float", 1.0, 20.0),
    ),
    LearnerKind.RANDOM_FOREST: (
        Param("mtry_fraction", "float", 0.0, 1.0),
        Param("min_node_size", "int", 2, 70),
        Param("max_depth", "int", 2, 50),
        Param("regularization_factor", "float", 0.0, 1.0),
    ),
    LearnerKind.ELASTIC_NET: (
        Param("alpha", "float", 0.0, 1.0),
        Param("lambda", "float", 0.0, 1.0),
    ),
}


class HyperparamSample(BaseModel):
    kind: LearnerKind
    params: dict[str, Any]
    draw: int

    def learner(self) -> LearnerSpec:
        return LearnerSpec(name=f"{self.kind.value}#{self.draw}", kind=self.kind, params=self.params)


def search_space(kind: LearnerKind) -> tuple[Param, ...]:
    try:
        return SEARCH_SPACES[LearnerKind(kind)]
    except KeyError:
        raise UnknownLearner(str(kind), sorted(k.value for k in SEARCH_SPACES)) from None


def draw_sample(kind: LearnerKind, draw: int, rng: RngStream) -> HyperparamSample:
    params = {p.name: p.draw(rng) for p in search_space(kind)}
    return HyperparamSample(kind=kind, params=params, draw=draw)


@dataclass
class TuneResult:
    kind: LearnerKind
    param_names: tuple[str, ...]
    table: pd.DataFrame
    master_seed: int = 0
    selected: dict[str, HyperparamSample] = field(default_factory=dict)

    def sample(self, row: int) -> HyperparamSample:
        rec = self.table.iloc[row]
        params = {name: _py(rec[name]) for name in self.param_names}
        draw = int(rec["draw"]) if "draw" in self.table.columns else row
        return HyperparamSample(kind=self.kind, params=params, draw=draw)


def _py(v):
    return v.item() if isinstance(v, np.generic) else v


def _evaluate_draw(
    sample: HyperparamSample,
    spec: ScenarioSpec,
    n: int,
    reps: int,
    seed: int,
) -> dict:
    run = run_replicates(spec, sample.learner(), n, reps, seed, threads=1, features=(0, 1))
    report = summarize(run)
    row = {"draw": sample.draw, **sample.params}
    for j, tag in enumerate(("b1", "b2")):
        row[f"{tag}_bias"] = float(report.bias[j])
        row[f"{tag}_variance"] = float(report.variance[j])
        row[f"{tag}_mse"] = float(report.mse[j])
    row["effect_mse"] = row["b1_mse"]
    row["prediction_mse"] = report.prediction_mse
    row["failures"] = report.failures
    return row


def random_search(
    kind: LearnerKind,
    n_draws: int,
    reps: int,
    spec: ScenarioSpec,
    n: int,
    master_seed: int,
    threads: Optional[int] = None,
) -> TuneResult:
    """draw 마다 reps 번 replicate 해서 beta_1, beta_2 효과 오차와 예측 MSE 를 기록한다."""
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws}")
    kind = LearnerKind(kind)
    space = search_space(kind)
    param_seed = derive_seed(master_seed, 0)
    samples = [draw_sample(kind, i, split_rng(param_seed, i)) for i in range(n_draws)]
    def evaluate(sample: HyperparamSample) -> dict:
        row = _evaluate_draw(sample, spec, n, reps, derive_seed(master_seed, 1, sample.draw))
        if (sample.draw + 1) % 10 == 0:
            logger.info(f"{kind.value} search: draw {sample.draw + 1}/{n_draws} done")
        return row

    rows = parallel_map(evaluate, samples, threads)
    table = pd.DataFrame(rows)
    return TuneResult(kind=kind, param_names=tuple(p.name for p in space), table=table, master_seed=master_seed)


def encode_params(table: pd.DataFrame, param_names: Sequence[str]) -> np.ndarray:
    """범주형 파라미터는 one-hot. 열 순서는 param_names 순서를 따른다."""
    X = pd.get_dummies(table[list(param_names)], dtype=np.float64)
    return X.to_numpy(dtype=np.float64)


def surrogate_select(result: TuneResult, target: str) -> HyperparamSample:
    """target 을 hyperparameter 로 회귀한 RF 의 예측값이 가장 작은 행.

    RF: settings.surrogate_trees 그루, mtry 1/3, min node settings.surrogate_min_node_size.
    """
    if target not in result.table.columns:
        raise KeyError(f"Unknown target '{target}'")
    table = result.table
    if table.empty:
        raise ValueError("Search table is empty")
    ok = np.flatnonzero(np.isfinite(table[target].to_numpy(dtype=np.float64)))
    if ok.size == 0:
        raise ValueError(f"No finite '{target}' values in the search table")
    if ok.size == 1:
        chosen = int(ok[0])
    else:
        X = encode_params(table, result.param_names)
        y = table[target].to_numpy(dtype=np.float64)
        rng = split_rng(derive_seed(result.master_seed, 2), TARGETS.index(target) if target in TARGETS else 99)
        forest = fit_rf(
            Dataset(X[ok], y[ok]),
            n_trees=settings.surrogate_trees,
            mtry_fraction=1 / 3,
            min_node_size=settings.surrogate_min_node_size,
            rng=rng,
        )
        pred = forest.predict(X[ok])
        chosen = int(ok[int(np.argmin(pred))])
    sample = result.sample(chosen)
    result.selected[target] = sample
    logger.info(f"Selected draw {sample.draw} for {target}: {sample.params}")
    return sample
