# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""학습 궤적: linear booster 의 step 별 계수, NN 의 batch update 별 ACE."""
import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..ace import conditional_effects
from ..learners.linear import BoosterTrace, fit_linear_booster
from ..learners.nn import NeuralNet, NnConfig, fit_nn
from ..randkit import split_rng
from ..scenarios import ScenarioSpec, gen_linear

logger = logging.getLogger(__name__)


def boosting_trace(
    spec: ScenarioSpec,
    n: int = 1000,
    n_steps: int = 200,
    eta: float = 1.0,
    seed: int = 0,
) -> BoosterTrace:
    d = gen_linear(spec, n, split_rng(seed, 0))
    _, trace = fit_linear_booster(d, n_steps=n_steps, eta=eta, rng=split_rng(seed, 1))
    return trace


def booster_trace_frame(trace: BoosterTrace, feature_names: Sequence[str]) -> pd.DataFrame:
    """step 별 한 행: chosen, beta_<f> (누적), inc_<f> (그 step 의 증분)."""
    data = {"step": np.arange(1, trace.cumulative.shape[0] + 1), "chosen": [feature_names[j] for j in trace.chosen]}
    for j, name in enumerate(feature_names):
        data[f"beta_{name}"] = trace.cumulative[:, j]
    for j, name in enumerate(feature_names):
        data[f"inc_{name}"] = trace.increments[:, j]
    return pd.DataFrame(data)


def nn_trace(
    spec: ScenarioSpec,
    n: int = 1000,
    cfg: Optional[NnConfig] = None,
    seed: int = 0,
    features: Sequence[int] = (0, 1),
) -> pd.DataFrame:
    """매 batch update 뒤 학습 데이터에서 ACE 를 잰다. 행 수 = epochs * batches_per_epoch."""
    if cfg is None:
        cfg = NnConfig()
    d = gen_linear(spec, n, split_rng(seed, 0))
    rows = []

    def hook(step: int, model: NeuralNet, loss: float):
        row = {"step": step, "loss": loss}
        for k in features:
            row[f"ace_{d.feature_names[k]}"] = float(conditional_effects(model, d.X, k).mean())
        rows.append(row)

    fit_nn(d, cfg, rng=split_rng(seed, 1), trace=hook)
    logger.info(f"NN trace: {len(rows)} steps recorded")
    return pd.DataFrame(rows)
