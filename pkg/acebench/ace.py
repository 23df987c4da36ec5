# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""학습된 모형에서 효과 추출: conditional effect, (가중) ACE, 2차 교호작용.

step h 는 feature 단위이며 h = h_fraction * sd(x_k) (표본 sd, ddof=1).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.stats

from .config import settings
from .errors import SameFeature, ZeroVariance
from .learners import TrainedModel, predict
from .learners.base import as_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AceReport:
    ce: np.ndarray                  # (n, q) 관측별 conditional effect
    ace: np.ndarray                 # (q,)
    h: np.ndarray                   # (q,)
    features: tuple[int, ...]
    weighted: bool = False
    weights: Optional[np.ndarray] = None   # (n,) 합 1, weighted 일 때만


@dataclass(frozen=True)
class InteractionReport:
    pair: tuple[int, int]
    ce2: np.ndarray
    value: float
    h_m: float
    h_k: float


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    sd: np.ndarray


def _h_fraction(value: Optional[float]) -> float:
    return settings.h_fraction if value is None else float(value)


def _step(X: np.ndarray, k: int, h_fraction: float) -> float:
    if not 0 <= k < X.shape[1]:
        raise IndexError(f"Feature index {k} out of range for {X.shape[1]} features")
    if h_fraction <= 0:
        raise ValueError(f"h_fraction must be > 0, got {h_fraction}")
    sd = float(np.std(X[:, k], ddof=1)) if X.shape[0] > 1 else 0.0
    if not sd > 0:
        raise ZeroVariance(f"Feature {k} has zero variance", index=k)
    return h_fraction * sd


def _shifted(X: np.ndarray, k: int, delta: float) -> np.ndarray:
    Xs = X.copy()
    Xs[:, k] += delta
    return Xs


def conditional_effects(
    m: TrainedModel,
    X,
    k: int,
    h_fraction: Optional[float] = None,
    central: bool = False,
) -> np.ndarray:
    """CE_i = [f(x_i + h e_k) - f(x_i)] / h. central=True 이면 중앙차분."""
    X = as_matrix(X, m.n_features)
    h = _step(X, k, _h_fraction(h_fraction))
    if central:
        return (predict(m, _shifted(X, k, h)) - predict(m, _shifted(X, k, -h))) / (2.0 * h)
    return (predict(m, _shifted(X, k, h)) - predict(m, X)) / h


def ace(
    m: TrainedModel,
    X,
    h_fraction: Optional[float] = None,
    central: bool = False,
    features: Optional[Sequence[int]] = None,
) -> AceReport:
    """features 를 주면 그 열만 계산한다 (기본: 전체)."""
    X = as_matrix(X, m.n_features)
    h_fraction = _h_fraction(h_fraction)
    ks = tuple(range(X.shape[1])) if features is None else tuple(int(k) for k in features)
    h = np.array([_step(X, k, h_fraction) for k in ks])
    ce = np.column_stack([conditional_effects(m, X, k, h_fraction, central=central) for k in ks])
    return AceReport(ce=ce, ace=ce.mean(axis=0), h=h, features=ks)


def silverman_bandwidth(x: np.ndarray) -> float:
    sd = float(np.std(x, ddof=1))
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 1.06 * spread * x.shape[0] ** (-0.2)


def kde_1d(x, bandwidth: Optional[float] = None, at=None) -> np.ndarray:
    """Gaussian kernel 밀도. at 이 없으면 표본점 자체에서 평가한다."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] < 2 or not np.std(x, ddof=1) > 0:
        raise ZeroVariance("Density estimation needs at least two distinct values")
    bw = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if bw <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bw}")
    # gaussian_kde 의 bandwidth = factor * 표본 sd
    kde = scipy.stats.gaussian_kde(x, bw_method=bw / np.std(x, ddof=1))
    points = x if at is None else np.asarray(at, dtype=np.float64).ravel()
    return kde(points)


def inverse_density_weights(
    x,
    density_floor_fraction: Optional[float] = None,
    bandwidth: Optional[float] = None,
) -> np.ndarray:
    """합이 1 인 1 / max(density, floor) 가중치. bandwidth 기본값은 Silverman."""
    if density_floor_fraction is None:
        density_floor_fraction = settings.density_floor_fraction
    if not 0.0 <= density_floor_fraction <= 1.0:
        raise ValueError(f"density_floor_fraction must be in [0, 1], got {density_floor_fraction}")
    dens = kde_1d(x, bandwidth)
    floor = density_floor_fraction * dens.max()
    w = 1.0 / np.maximum(dens, floor)
    return w / w.sum()


def weighted_ace(
    m: TrainedModel,
    X,
    k: int,
    h_fraction: Optional[float] = None,
    density_floor_fraction: Optional[float] = None,
    bandwidth: Optional[float] = None,
) -> AceReport:
    """x_k 의 주변 밀도 역수로 가중한 ACE. 밀도는 floor = fraction * max density 에서 잘린다.

    floor 가 1 이면 모든 가중치가 같아져 보통의 ACE 가 된다. floor 를 낮추거나
    bandwidth 를 줄일수록 표본이 드문 꼬리 쪽 기울기의 비중이 커진다.
    """
    X = as_matrix(X, m.n_features)
    h_fraction = _h_fraction(h_fraction)
    h = _step(X, k, h_fraction)
    ce = conditional_effects(m, X, k, h_fraction)
    try:
        w = inverse_density_weights(X[:, k], density_floor_fraction, bandwidth)
    except ZeroVariance as e:
        raise ZeroVariance(e.detail, index=k) from e
    return AceReport(
        ce=ce[:, None],
        ace=np.array([w @ ce]),
        h=np.array([h]),
        features=(k,),
        weighted=True,
        weights=w,
    )


def interaction_ace(
    m: TrainedModel,
    X,
    pair: tuple[int, int],
    h_fraction: Optional[float] = None,
) -> InteractionReport:
    """혼합 중앙차분 [f(++) - f(-+) - f(+-) + f(--)] / (4 h_m h_k) 의 평균.

    입력 X 는 중심화, 표준화된 상태여야 한다(standardize 참고).
    """
    X = as_matrix(X, m.n_features)
    a, b = (int(i) for i in pair)
    if a == b:
        raise SameFeature(f"Interaction needs two distinct features, got ({a}, {b})")
    h_fraction = _h_fraction(h_fraction)
    h_a = _step(X, a, h_fraction)
    h_b = _step(X, b, h_fraction)

    def f(sa: float, sb: float) -> np.ndarray:
        Xs = X.copy()
        Xs[:, a] += sa * h_a
        Xs[:, b] += sb * h_b
        return predict(m, Xs)

    ce2 = (f(1, 1) - f(-1, 1) - f(1, -1) + f(-1, -1)) / (4.0 * h_a * h_b)
    return InteractionReport(pair=(a, b), ce2=ce2, value=float(ce2.mean()), h_m=h_a, h_k=h_b)


def standardize(X) -> tuple[np.ndarray, Standardization]:
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise ZeroVariance("Standardization needs at least two rows")
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sd > 0))
    if bad.size:
        raise ZeroVariance(f"Feature {int(bad[0])} has zero variance", index=int(bad[0]))
    return (X - mean) / sd, Standardization(mean=mean, sd=sd)


def unstandardize(Z, record: Standardization) -> np.ndarray:
    return as_matrix(Z, record.mean.shape[0]) * record.sd + record.mean


def add_interaction_columns(
    X,
    pairs: Sequence[tuple[int, int]],
    feature_names: Optional[Sequence[str]] = None,
) -> tuple[np.ndarray, tuple[str, ...]]:
    """x_m * x_k 열을 뒤에 붙인다. 이름은 'x1:x2' 형식."""
    X = as_matrix(X)
    names = tuple(feature_names) if feature_names else tuple(f"x{j + 1}" for j in range(X.shape[1]))
    cols, extra = [], []
    for a, b in pairs:
        if a == b:
            raise SameFeature(f"Interaction needs two distinct features, got ({a}, {b})")
        cols.append(X[:, a] * X[:, b])
        extra.append(f"{names[a]}:{names[b]}")
    if not cols:
        return X.copy(), names
    return np.column_stack([X, *cols]), names + tuple(extra)
