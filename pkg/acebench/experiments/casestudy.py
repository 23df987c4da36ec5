# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""case study: 관측 데이터로 학습한 full 모형(collider 포함) 과 causal 모형
(smoking + nutrition) 을 관측 분포(in_dist) 와 RCT 분포(ood) 에서 R^2 로 비교한다."""
import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..errors import ZeroVariance
from ..learners import LearnerSpec, fit_learner, predict
from ..randkit import split_rng
from ..scenarios import CASE_STUDY_FEATURES, CAUSAL_FEATURES, CaseStudySpec, gen_case_study
from . import parallel_map

logger = logging.getLogger(__name__)

FEATURE_SETS = {
    "full": tuple(range(len(CASE_STUDY_FEATURES))),
    "causal": tuple(CASE_STUDY_FEATURES.index(f) for f in CAUSAL_FEATURES),
}


def r2(y, yhat) -> float:
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"Length mismatch: {y.shape[0]} vs {yhat.shape[0]}")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if not ss_tot > 0:
        raise ZeroVariance("R^2 undefined for a constant response")
    return 1.0 - float(np.sum((y - yhat) ** 2)) / ss_tot


def case_study_eval(
    learners: Sequence[LearnerSpec],
    spec: Optional[CaseStudySpec] = None,
    n_train: int = 2000,
    n_test: int = 2000,
    seed: int = 0,
    threads: Optional[int] = None,
) -> pd.DataFrame:
    """행: (model, feature_set, distribution, r2).

    stream 0 = 학습, 1 = 관측 test, 2 = RCT test, 3 + i = i 번째 (learner, feature set) 적합.
    """
    if spec is None:
        spec = CaseStudySpec()
    spec = spec.with_mode("observational")
    train = gen_case_study(spec, n_train, split_rng(seed, 0))
    tests = {
        "in_dist": gen_case_study(spec, n_test, split_rng(seed, 1)),
        "ood": gen_case_study(spec.with_mode("rct"), n_test, split_rng(seed, 2)),
    }
    jobs = [(learner, fs) for learner in learners for fs in FEATURE_SETS]

    def run(job_idx: int) -> list[tuple]:
        learner, fs = jobs[job_idx]
        cols = list(FEATURE_SETS[fs])
        model = fit_learner(learner, train.select(cols), split_rng(seed, 3 + job_idx))
        out = []
        for dist, test in tests.items():
            out.append((learner.name, fs, dist, r2(test.y, predict(model, test.X[:, cols]))))
        logger.debug(f"case study {learner.name}/{fs}: {out}")
        return out

    rows = [row for chunk in parallel_map(run, range(len(jobs)), threads) for row in chunk]
    return pd.DataFrame(rows, columns=["model", "feature_set", "distribution", "r2"])
