# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""학습기 레지스트리.

LearnerSpec = (이름, 종류, 파라미터). fit_learner 가 종류별 fit 함수로 보내고
파라미터는 종류별 pydantic config 로 검증한다.
"""
import logging
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..errors import InvalidData, UnknownLearner, UsageError
from ..randkit import RngStream
from .base import Dataset, LearnerKind, TrainedModel, as_matrix
from .linear import (
    ElasticNetConfig,
    LinearBoosterConfig,
    LinearModel,
    OlsConfig,
    cv_select_lambda,
    fit_elastic_net,
    fit_linear_booster,
    fit_ols,
)
from .nn import NeuralNet, NnConfig, fit_nn
from .trees import (
    GbtConfig,
    GradientBoostedTrees,
    RandomForest,
    RfConfig,
    Tree,
    TreeConfig,
    fit_gbt,
    fit_rf,
    fit_tree,
)

logger = logging.getLogger(__name__)

CONFIG_MODELS: dict[LearnerKind, type[BaseModel]] = {
    LearnerKind.OLS: OlsConfig,
    LearnerKind.ELASTIC_NET: ElasticNetConfig,
    LearnerKind.TREE: TreeConfig,
    LearnerKind.RANDOM_FOREST: RfConfig,
    LearnerKind.GBT: GbtConfig,
    LearnerKind.LINEAR_BOOSTER: LinearBoosterConfig,
    LearnerKind.NEURAL_NET: NnConfig,
}


class LearnerSpec(BaseModel):
    name: str
    kind: LearnerKind
    params: dict[str, Any] = Field(default_factory=dict)

    def config(self) -> BaseModel:
        return CONFIG_MODELS[self.kind](**self.params)

    def with_params(self, **params) -> "LearnerSpec":
        return LearnerSpec(name=self.name, kind=self.kind, params={**self.params, **params})


def _preset(name: str, kind: LearnerKind, **params) -> LearnerSpec:
    return LearnerSpec(name=name, kind=kind, params=params)


# 그림에서 쓰는 기본 설정들. 별칭(rf, brt, nn)은 같은 설정을 가리킨다.
PRESETS: dict[str, LearnerSpec] = {
    "ols": _preset("ols", LearnerKind.OLS),
    "elastic_net": _preset("elastic_net", LearnerKind.ELASTIC_NET, alpha=0.2),
    "lasso": _preset("lasso", LearnerKind.ELASTIC_NET, alpha=1.0),
    "ridge": _preset("ridge", LearnerKind.ELASTIC_NET, alpha=0.0),
    "tree": _preset("tree", LearnerKind.TREE),
    "tree_lc": _preset("tree_lc", LearnerKind.TREE, max_depth=2),
    "tree_hc": _preset("tree_hc", LearnerKind.TREE, max_depth=20),
    "random_forest": _preset("random_forest", LearnerKind.RANDOM_FOREST),
    "rf": _preset("rf", LearnerKind.RANDOM_FOREST),
    "gbt": _preset("gbt", LearnerKind.GBT),
    "brt": _preset("brt", LearnerKind.GBT),
    "gbt_lc": _preset("gbt_lc", LearnerKind.GBT, max_depth=1),
    "gbt_hc": _preset("gbt_hc", LearnerKind.GBT, max_depth=6),
    "linear_booster": _preset("linear_booster", LearnerKind.LINEAR_BOOSTER),
    "neural_net": _preset("neural_net", LearnerKind.NEURAL_NET),
    "nn": _preset("nn", LearnerKind.NEURAL_NET),
    "nn_dropout": _preset("nn_dropout", LearnerKind.NEURAL_NET, dropout_rate=0.3),
}


def config_fields(kind: LearnerKind) -> frozenset[str]:
    """kind 의 config 가 받는 파라미터 이름 (alias 포함)."""
    names = set()
    for field_name, info in CONFIG_MODELS[LearnerKind(kind)].model_fields.items():
        names.add(field_name)
        if info.alias:
            names.add(info.alias)
    return frozenset(names)


def resolve_learner(name: Union[str, LearnerSpec], params: Optional[dict] = None) -> LearnerSpec:
    """preset 이름 또는 LearnerSpec. params 는 preset 값 위에 덮어쓴다.

    모르는 파라미터나 범위 밖 값은 UsageError.
    """
    if isinstance(name, LearnerSpec):
        spec = name
    else:
        key = name.strip().lower()
        if key not in PRESETS:
            raise UnknownLearner(name, sorted(PRESETS))
        spec = PRESETS[key]
    if params:
        spec = spec.with_params(**params)
    try:
        spec.config()
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '-'}: {err['msg']}" for err in e.errors()
        )
        raise UsageError(f"Invalid parameters for learner '{spec.name}': {problems}") from e
    return spec


def fit_learner(spec: LearnerSpec, d: Dataset, rng: RngStream) -> TrainedModel:
    cfg = spec.config()
    kind = spec.kind
    if kind == LearnerKind.OLS:
        return fit_ols(d)
    if kind == LearnerKind.ELASTIC_NET:
        lam = cfg.lambda_
        if lam is None:
            lam = cv_select_lambda(d, cfg.alpha, cfg.folds, None, rng, tol=cfg.tol, max_iter=cfg.max_iter)
        return fit_elastic_net(d, alpha=cfg.alpha, lambda_=lam, tol=cfg.tol, max_iter=cfg.max_iter)
    if kind == LearnerKind.TREE:
        return fit_tree(d, rng=rng, **cfg.model_dump())
    if kind == LearnerKind.RANDOM_FOREST:
        return fit_rf(d, rng=rng, **cfg.model_dump())
    if kind == LearnerKind.GBT:
        return fit_gbt(d, rng=rng, **cfg.model_dump())
    if kind == LearnerKind.LINEAR_BOOSTER:
        model, _ = fit_linear_booster(d, n_steps=cfg.n_steps, eta=cfg.eta, rng=rng)
        return model
    if kind == LearnerKind.NEURAL_NET:
        return fit_nn(d, cfg, rng=rng)
    raise UnknownLearner(str(kind), sorted(PRESETS))


def predict(m: TrainedModel, X) -> np.ndarray:
    X = as_matrix(X, m.n_features)
    yhat = m.predict(X)
    if not np.all(np.isfinite(yhat)):
        raise InvalidData(f"{m.kind.value} produced non-finite predictions")
    return yhat


__all__ = [
    "CONFIG_MODELS",
    "Dataset",
    "ElasticNetConfig",
    "GbtConfig",
    "GradientBoostedTrees",
    "LearnerKind",
    "LearnerSpec",
    "LinearBoosterConfig",
    "LinearModel",
    "NeuralNet",
    "NnConfig",
    "OlsConfig",
    "PRESETS",
    "RandomForest",
    "RfConfig",
    "TrainedModel",
    "Tree",
    "TreeConfig",
    "config_fields",
    "fit_learner",
    "predict",
    "resolve_learner",
]
