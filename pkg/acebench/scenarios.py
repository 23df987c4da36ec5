# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""데이터 생성 시나리오.

선형 시나리오:  X ~ MVN(0, Sigma) (또는 lognormal 주변분포), y = X beta + 구조항 + N(0, sigma).
case study:    latent financial -> smoking, nutrition -> lung_cancer -> lung_volume (collider).
시나리오 명세는 YAML 로 저장/로드된다.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .config import settings
from .errors import InvalidCovariance, NoAnalyticTruth, UnknownScenario
from .learners.base import Dataset
from .randkit import CovMatrix, RngStream, lkj_sample_corr, mvn_sample

logger = logging.getLogger(__name__)


class CovarianceSpec(BaseModel):
    kind: Literal["identity", "fixed", "lkj"] = "identity"
    entries: Optional[list[list[float]]] = None  # kind == "fixed"
    eta: float = Field(default=2.0, gt=0.0)      # kind == "lkj"


class StructuralTerm(BaseModel):
    """interaction: coefficient * x_a * x_b,  hinge: coefficient * max(x_a - knot, 0)."""

    kind: Literal["interaction", "hinge"]
    features: list[int]
    coefficient: float = 1.0
    knot: float = 0.0

    @model_validator(mode="after")
    def check_arity(self):
        need = 2 if self.kind == "interaction" else 1
        if len(self.features) != need:
            raise ValueError(f"{self.kind} term needs {need} feature index(es), got {self.features}")
        if self.kind == "interaction" and self.features[0] == self.features[1]:
            raise ValueError("interaction term needs two distinct features")
        return self


class FeatureDist(BaseModel):
    kind: Literal["normal", "lognormal"] = "normal"
    meanlog: float = 0.0
    sdlog: float = Field(default=0.5, gt=0.0)


class ScenarioSpec(BaseModel):
    name: str
    p: int = Field(ge=1)
    beta: list[float]
    covariance: CovarianceSpec = Field(default_factory=CovarianceSpec)
    noise_sigma: float = Field(default=0.3, ge=0.0)
    structural: list[StructuralTerm] = Field(default_factory=list)
    feature_dist: FeatureDist = Field(default_factory=FeatureDist)
    n_default: int = Field(default=1000, ge=2)

    @model_validator(mode="after")
    def check_dimensions(self):
        if len(self.beta) != self.p:
            raise ValueError(f"beta has {len(self.beta)} entries for p={self.p}")
        cov = self.covariance
        if cov.kind == "fixed":
            if cov.entries is None:
                raise ValueError("fixed covariance needs entries")
            CovMatrix(np.array(cov.entries))
            if len(cov.entries) != self.p:
                raise ValueError(f"covariance is {len(cov.entries)}x{len(cov.entries)} for p={self.p}")
        if cov.kind == "lkj" and self.p < 2:
            raise ValueError("lkj covariance needs p >= 2")
        for term in self.structural:
            if max(term.features) >= self.p or min(term.features) < 0:
                raise ValueError(f"structural term references feature outside 0..{self.p - 1}")
        return self

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f"x{k + 1}" for k in range(self.p))


class CaseStudySpec(BaseModel):
    name: str = "casestudy"
    mode: Literal["observational", "rct"] = "observational"
    financial_to_smoking: float = 0.8
    financial_to_nutrition: float = 0.8
    smoking_to_cancer: float = 1.0
    nutrition_to_cancer: float = -0.5
    financial_to_cancer: float = 0.5
    smoking_to_lung_volume: float = 0.7
    cancer_to_lung_volume: float = -0.7
    noise_sd: float = Field(default=0.5, gt=0.0)
    rct_lung_volume_sd: float = Field(default=0.65, gt=0.0)  # 치료로 lung volume 이 원인과 분리됨
    n_default: int = Field(default=2000, ge=2)

    @field_validator("mode", mode="before")
    @classmethod
    def normalize_mode(cls, v):
        return v.lower() if isinstance(v, str) else v

    def with_mode(self, mode: str) -> "CaseStudySpec":
        return self.model_copy(update={"mode": mode})

    @property
    def causal_effects(self) -> dict[str, float]:
        """lung_cancer 구조식의 직접 효과."""
        return {"smoking": self.smoking_to_cancer, "nutrition": self.nutrition_to_cancer}


CASE_STUDY_FEATURES = ("smoking", "nutrition", "lung_volume")
CAUSAL_FEATURES = ("smoking", "nutrition")

AnySpec = Union[ScenarioSpec, CaseStudySpec]


# ------------------------------------------------------------------
# 생성
# ------------------------------------------------------------------

def draw_covariance(spec: ScenarioSpec, rng: Optional[RngStream] = None) -> CovMatrix:
    cov = spec.covariance
    if cov.kind == "identity":
        return CovMatrix.identity(spec.p)
    if cov.kind == "fixed":
        return CovMatrix(np.array(cov.entries, dtype=np.float64))
    if rng is None:
        raise InvalidCovariance("lkj covariance needs an RngStream")
    return lkj_sample_corr(spec.p, cov.eta, rng)


def _structural(spec: ScenarioSpec, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[0])
    for term in spec.structural:
        if term.kind == "interaction":
            a, b = term.features
            out += term.coefficient * X[:, a] * X[:, b]
        else:
            out += term.coefficient * np.maximum(X[:, term.features[0]] - term.knot, 0.0)
    return out


def gen_linear(
    spec: ScenarioSpec,
    n: int,
    rng: RngStream,
    cov: Optional[CovMatrix] = None,
) -> Dataset:
    """cov 가 없고 lkj 이면 호출마다 Sigma 를 새로 뽑는다 (rng 에서 X 보다 먼저)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if cov is None:
        cov = draw_covariance(spec, rng)
    if cov.dim != spec.p:
        raise InvalidCovariance(f"covariance dim {cov.dim} != p={spec.p}")
    Z = mvn_sample(0.0, cov, n, rng)
    if spec.feature_dist.kind == "lognormal":
        fd = spec.feature_dist
        X = np.exp(fd.meanlog + fd.sdlog * Z)
    else:
        X = Z
    y = X @ np.asarray(spec.beta) + _structural(spec, X)
    if spec.noise_sigma > 0:
        y = y + rng.normal(0.0, spec.noise_sigma, size=n)
    return Dataset(X, y, spec.feature_names)


def gen_case_study(spec: CaseStudySpec, n: int, rng: RngStream) -> Dataset:
    """features (smoking, nutrition, lung_volume), response lung_cancer.

    두 모드 모두 lung_cancer | (smoking, nutrition, financial) 구조식은 같고
    feature 의 결합분포만 다르다.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    s = spec
    financial = rng.standard_normal(n)
    if s.mode == "observational":
        smoking = s.financial_to_smoking * financial + rng.normal(0.0, s.noise_sd, n)
        nutrition = s.financial_to_nutrition * financial + rng.normal(0.0, s.noise_sd, n)
    else:
        # 관측 모드와 같은 주변 분산으로 독립 배정
        sd_s = np.sqrt(s.financial_to_smoking ** 2 + s.noise_sd ** 2)
        sd_n = np.sqrt(s.financial_to_nutrition ** 2 + s.noise_sd ** 2)
        smoking = rng.normal(0.0, sd_s, n)
        nutrition = rng.normal(0.0, sd_n, n)
    cancer = (
        s.smoking_to_cancer * smoking
        + s.nutrition_to_cancer * nutrition
        + s.financial_to_cancer * financial
        + rng.normal(0.0, s.noise_sd, n)
    )
    if s.mode == "observational":
        lung_volume = (
            s.smoking_to_lung_volume * smoking
            + s.cancer_to_lung_volume * cancer
            + rng.normal(0.0, s.noise_sd, n)
        )
    else:
        lung_volume = rng.normal(0.0, s.rct_lung_volume_sd, n)
    X = np.column_stack([smoking, nutrition, lung_volume])
    return Dataset(X, cancer, CASE_STUDY_FEATURES)


def generate(spec: AnySpec, n: int, rng: RngStream) -> Dataset:
    if isinstance(spec, CaseStudySpec):
        return gen_case_study(spec, n, rng)
    return gen_linear(spec, n, rng)


# ------------------------------------------------------------------
# 참값
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    feature: int
    knot: float
    slope_change: float


@dataclass(frozen=True)
class TrueEffects:
    """main 은 모든 hinge 의 knot 왼쪽 기울기. 관측별 기울기는 slopes_at."""

    main: np.ndarray
    interactions: dict[tuple[int, int], float] = field(default_factory=dict)
    regimes: tuple[Regime, ...] = ()

    def slopes_at(self, X) -> np.ndarray:
        """(n, p) 관측별 참 편미분. 교호항은 상대 feature 값만큼 기울기를 더한다."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        S = np.tile(self.main, (X.shape[0], 1))
        for (a, b), c in self.interactions.items():
            S[:, a] += c * X[:, b]
            S[:, b] += c * X[:, a]
        for r in self.regimes:
            S[:, r.feature] += r.slope_change * (X[:, r.feature] > r.knot)
        return S

    def average(self, X, weights: Optional[np.ndarray] = None) -> np.ndarray:
        """주어진 표본(및 가중치)에서의 참 ACE."""
        S = self.slopes_at(X)
        if weights is None:
            return S.mean(axis=0)
        w = np.asarray(weights, dtype=np.float64)
        return w @ S / w.sum()


def true_effects(spec: AnySpec) -> TrueEffects:
    if isinstance(spec, CaseStudySpec):
        raise NoAnalyticTruth(
            "Case-study full model has no analytic ACE; use CaseStudySpec.causal_effects"
        )
    interactions = {}
    regimes = []
    for term in spec.structural:
        if term.kind == "interaction":
            a, b = sorted(term.features)
            interactions[(a, b)] = interactions.get((a, b), 0.0) + term.coefficient
        else:
            regimes.append(Regime(term.features[0], term.knot, term.coefficient))
    return TrueEffects(
        main=np.asarray(spec.beta, dtype=np.float64),
        interactions=interactions,
        regimes=tuple(regimes),
    )


# ------------------------------------------------------------------
# 내장 시나리오
# ------------------------------------------------------------------

def _pair_corr(p: int, rho: float) -> CovarianceSpec:
    S = np.eye(p)
    S[0, 1] = S[1, 0] = rho
    return CovarianceSpec(kind="fixed", entries=S.tolist())


def _collinear(name: str, beta: list[float], rho: float, sigma: float = 0.3) -> ScenarioSpec:
    return ScenarioSpec(name=name, p=len(beta), beta=beta, covariance=_pair_corr(len(beta), rho), noise_sigma=sigma)


def _datapoor_beta(p: int = 100) -> list[float]:
    return [1.0, 0.0] + np.linspace(0.0, 1.0, p - 1)[1:].tolist()


def _interaction5(name: str, rho: float) -> ScenarioSpec:
    return ScenarioSpec(
        name=name,
        p=5,
        beta=[1.0, 0.0, 0.0, 0.0, 1.0],
        covariance=_pair_corr(5, rho) if rho else CovarianceSpec(),
        noise_sigma=1.0,
        structural=[StructuralTerm(kind="interaction", features=[0, 1], coefficient=1.0)],
        n_default=5000,
    )


BASE_BETA = [1.0, 0.0, 1.0, 0.0, 0.0]

_CATALOG = {
    "base5": lambda: ScenarioSpec(name="base5", p=5, beta=BASE_BETA),
    "collinear09": lambda: _collinear("collinear09", BASE_BETA, 0.9),
    "collinear099": lambda: _collinear("collinear099", BASE_BETA, 0.99),
    "confounder05": lambda: _collinear("confounder05", [1.0, 0.5, 1.0], 0.5),
    "confounder05neg": lambda: _collinear("confounder05neg", [1.0, -0.5, 1.0], 0.5),
    # 부스팅 연구용 세 가지 (x1, x2 상관 0.9)
    "mediator09": lambda: _collinear("mediator09", BASE_BETA, 0.9),
    "confounder09": lambda: _collinear("confounder09", [1.0, 0.5, 1.0, 0.0, 0.0], 0.9),
    "greedy09": lambda: _collinear("greedy09", [1.0, 0.25, 1.0, 0.0, 0.0], 0.9),
    "interaction5": lambda: _interaction5("interaction5", 0.0),
    "interaction5_collinear": lambda: _interaction5("interaction5_collinear", 0.9),
    "datapoor": lambda: ScenarioSpec(
        name="datapoor", p=100, beta=_datapoor_beta(),
        covariance=CovarianceSpec(kind="lkj", eta=2.0), n_default=100,
    ),
    "datapoor_independent": lambda: ScenarioSpec(
        name="datapoor_independent", p=100, beta=_datapoor_beta(), n_default=100,
    ),
    # y = 2 * min(x, 2) + e  =  2x - 2 * max(x - 2, 0) + e
    "nonuniform": lambda: ScenarioSpec(
        name="nonuniform", p=1, beta=[2.0],
        structural=[StructuralTerm(kind="hinge", features=[0], coefficient=-2.0, knot=2.0)],
        feature_dist=FeatureDist(kind="lognormal", meanlog=0.0, sdlog=0.5),
        n_default=2000,
    ),
    "casestudy": lambda: CaseStudySpec(name="casestudy"),
    "casestudy_rct": lambda: CaseStudySpec(name="casestudy_rct", mode="rct"),
}


def catalog() -> list[str]:
    return list(_CATALOG)


def builtin(name: str) -> AnySpec:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise UnknownScenario(name, catalog()) from None
    return factory()


# ------------------------------------------------------------------
# YAML
# ------------------------------------------------------------------

def spec_to_dict(spec: AnySpec) -> dict:
    return spec.model_dump(mode="json")


def spec_from_dict(data: dict) -> AnySpec:
    if "mode" in data:
        return CaseStudySpec.model_validate(data)
    return ScenarioSpec.model_validate(data)


def save_spec(spec: AnySpec, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(spec_to_dict(spec), f, sort_keys=False)
    return path


def load_spec(path: Union[str, Path]) -> AnySpec:
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    return spec_from_dict(data)


def resolve_scenario(name_or_path: str) -> AnySpec:
    """내장 이름, YAML 파일 경로, 또는 settings.scenario_dir 안의 <name>.yaml 순으로 찾는다."""
    if name_or_path in _CATALOG:
        return builtin(name_or_path)
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml") or path.is_file():
        return load_spec(path)
    local = Path(settings.scenario_dir) / f"{name_or_path}.yaml"
    if local.is_file():
        logger.debug(f"Scenario '{name_or_path}' loaded from {local}")
        return load_spec(local)
    raise UnknownScenario(name_or_path, catalog())
