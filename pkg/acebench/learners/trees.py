# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""회귀 트리(CART), 랜덤 포레스트, gradient boosting.

세 학습기 모두 같은 분할 탐색기(_grow)를 쓴다. 노드 점수는
score(S, n) = soft_threshold(S, l1)^2 / (n + l2) 이고 l1 = l2 = 0 이면
분산 감소(CART) 와 같다. 분할 임계값은 인접한 정렬값의 중점, x <= threshold 가 왼쪽.
동률은 낮은 feature index, 그다음 낮은 threshold 가 이긴다.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..randkit import RngStream
from .base import Dataset, LearnerKind, as_matrix
from .linear import soft_threshold

logger = logging.getLogger(__name__)

LEAF = -1


class TreeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_depth: Optional[int] = Field(default=None, ge=1)
    min_node_size: int = Field(default=5, ge=1)
    mtry_fraction: float = Field(default=1.0, ge=0.0, le=1.0)
    regularization_factor: float = Field(default=1.0, ge=0.0, le=1.0)


class RfConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_trees: int = Field(default=100, ge=1)
    mtry_fraction: float = Field(default=1 / 3, ge=0.0, le=1.0)
    min_node_size: int = Field(default=5, ge=1)
    max_depth: Optional[int] = Field(default=None, ge=1)
    regularization_factor: float = Field(default=1.0, ge=0.0, le=1.0)
    bootstrap: bool = True


class GbtConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_trees: int = Field(default=140, ge=1)
    eta: float = Field(default=0.3, gt=0.0)
    max_depth: Optional[int] = Field(default=6, ge=1)
    subsample: float = Field(default=1.0, gt=0.0, le=1.0)
    lambda_l2: float = Field(default=0.0, ge=0.0)
    alpha_l1: float = Field(default=0.0, ge=0.0)
    min_node_size: int = Field(default=1, ge=1)
    colsample: float = Field(default=1.0, gt=0.0, le=1.0)  # 기본값 1: 열 subsampling 없음


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray      # LEAF 이면 잎
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    depth: np.ndarray
    n_samples: np.ndarray
    n_features: int
    kind: LearnerKind = LearnerKind.TREE

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def apply(self, X) -> np.ndarray:
        """각 행이 도달하는 잎 노드 번호."""
        X = as_matrix(X, self.n_features)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        for _ in range(self.max_depth):
            f = self.feature[node]
            internal = f != LEAF
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, nxt, node)
        return node

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]


def n_try_features(mtry_fraction: float, p: int) -> int:
    return min(p, max(1, math.ceil(mtry_fraction * p)))


def _score(S, n, l1: float, l2: float):
    return soft_threshold(S, l1) ** 2 / (n + l2)


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    rng: Optional[RngStream],
    max_depth: Optional[int] = None,
    min_node_size: int = 1,
    mtry_fraction: float = 1.0,
    regularization_factor: float = 1.0,
    l1: float = 0.0,
    l2: float = 0.0,
) -> Tree:
    if min_node_size < 1:
        raise ValueError(f"min_node_size must be >= 1, got {min_node_size}")
    p = X.shape[1]
    n_try = n_try_features(mtry_fraction, p)
    used = np.zeros(p, dtype=bool)

    feature, threshold, left, right, value, depth, n_samples = [], [], [], [], [], [], []

    def new_node(idx: np.ndarray, d: int) -> int:
        S = y[idx].sum()
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(soft_threshold(S, l1) / (idx.shape[0] + l2)))
        depth.append(d)
        n_samples.append(idx.shape[0])
        return len(feature) - 1

    stack = [(new_node(rows, 0), rows, 0)]
    while stack:
        node, idx, d = stack.pop()
        m = idx.shape[0]
        if (max_depth is not None and d >= max_depth) or m < 2 * min_node_size:
            continue

        if n_try < p:
            feats = np.sort(rng.choice(p, size=n_try, replace=False))
        else:
            feats = np.arange(p)

        Xn = X[np.ix_(idx, feats)]
        yn = y[idx]
        order = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, order, axis=0)
        ys = yn[order]
        total = yn.sum()
        SL = np.cumsum(ys, axis=0)[:-1]
        SR = total - SL
        nL = np.arange(1, m, dtype=np.float64)[:, None]
        nR = m - nL
        gain = _score(SL, nL, l1, l2) + _score(SR, nR, l1, l2) - _score(total, m, l1, l2)
        valid = (xs[1:] > xs[:-1]) & (nL >= min_node_size) & (nR >= min_node_size)
        if regularization_factor < 1.0 and used.any():
            gain = gain * np.where(used[feats], 1.0, regularization_factor)[None, :]
        gain = np.where(valid, gain, -np.inf)

        # feature 우선 순서로 펼쳐서 argmax: 낮은 feature, 낮은 threshold 가 이김
        flat = gain.T.ravel()
        best = int(np.argmax(flat))
        tol = 1e-12 * max(float(yn @ yn), 1.0)
        if not np.isfinite(flat[best]) or flat[best] <= tol:
            continue
        col, pos = divmod(best, m - 1)
        f = int(feats[col])
        thr = 0.5 * (xs[pos, col] + xs[pos + 1, col])
        go_left = X[idx, f] <= thr
        used[f] = True

        feature[node] = f
        threshold[node] = thr
        left_idx, right_idx = idx[go_left], idx[~go_left]
        left[node] = new_node(left_idx, d + 1)
        right[node] = new_node(right_idx, d + 1)
        stack.append((right[node], right_idx, d + 1))
        stack.append((left[node], left_idx, d + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        depth=np.array(depth, dtype=np.int64),
        n_samples=np.array(n_samples, dtype=np.int64),
        n_features=p,
    )


def fit_tree(
    d: Dataset,
    max_depth: Optional[int] = None,
    min_node_size: int = 5,
    mtry_fraction: float = 1.0,
    rng: Optional[RngStream] = None,
    regularization_factor: float = 1.0,
) -> Tree:
    return _grow(
        d.X, d.y, np.arange(d.n), rng,
        max_depth=max_depth,
        min_node_size=min_node_size,
        mtry_fraction=mtry_fraction,
        regularization_factor=regularization_factor,
    )


# ------------------------------------------------------------------
# Random forest
# ------------------------------------------------------------------

@dataclass(frozen=True)
class RandomForest:
    trees: tuple[Tree, ...]
    n_features: int
    kind: LearnerKind = LearnerKind.RANDOM_FOREST

    def member_predictions(self, X) -> np.ndarray:
        X = as_matrix(X, self.n_features)
        return np.stack([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        return self.member_predictions(X).mean(axis=0)


def fit_rf(
    d: Dataset,
    n_trees: int = 100,
    mtry_fraction: float = 1 / 3,
    min_node_size: int = 5,
    max_depth: Optional[int] = None,
    regularization_factor: float = 1.0,
    rng: Optional[RngStream] = None,
    bootstrap: bool = True,
) -> RandomForest:
    """bootstrap 재표본 CART 의 평균. 분할마다 ceil(mtry_fraction * p) 개 feature 를 뽑는다.

    regularization_factor 는 현재 트리에서 아직 쓰이지 않은 feature 의 분할 이득에 곱해진다.
    """
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    trees = []
    for _ in range(n_trees):
        rows = rng.integers(0, d.n, size=d.n) if bootstrap else np.arange(d.n)
        trees.append(_grow(
            d.X, d.y, rows, rng,
            max_depth=max_depth,
            min_node_size=min_node_size,
            mtry_fraction=mtry_fraction,
            regularization_factor=regularization_factor,
        ))
    logger.debug(f"RF fit: {n_trees} trees, mean nodes={np.mean([t.n_nodes for t in trees]):.1f}")
    return RandomForest(trees=tuple(trees), n_features=d.p)


# ------------------------------------------------------------------
# Gradient boosting (squared loss)
# ------------------------------------------------------------------

@dataclass(frozen=True)
class GradientBoostedTrees:
    base: float
    eta: float
    trees: tuple[Tree, ...]
    n_features: int
    kind: LearnerKind = LearnerKind.GBT

    def staged_predict(self, X) -> Iterator[np.ndarray]:
        X = as_matrix(X, self.n_features)
        pred = np.full(X.shape[0], self.base)
        for t in self.trees:
            pred = pred + self.eta * t.predict(X)
            yield pred

    def predict(self, X) -> np.ndarray:
        X = as_matrix(X, self.n_features)
        if not self.trees:
            return np.full(X.shape[0], self.base)
        return self.base + self.eta * np.sum([t.predict(X) for t in self.trees], axis=0)


def fit_gbt(
    d: Dataset,
    n_trees: int = 140,
    eta: float = 0.3,
    max_depth: Optional[int] = 6,
    subsample: float = 1.0,
    lambda_l2: float = 0.0,
    alpha_l1: float = 0.0,
    rng: Optional[RngStream] = None,
    min_node_size: int = 1,
    colsample: float = 1.0,
) -> GradientBoostedTrees:
    """단계별 잔차 적합. 잎 가중치 = soft_threshold(sum(residual), alpha_l1) / (count + lambda_l2)."""
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    if not 0.0 < subsample <= 1.0:
        raise ValueError(f"subsample must be in (0, 1], got {subsample}")
    base = float(d.y.mean())
    pred = np.full(d.n, base)
    n_sub = max(1, round(subsample * d.n))
    trees = []
    for _ in range(n_trees):
        resid = d.y - pred
        if n_sub < d.n:
            rows = np.sort(rng.choice(d.n, size=n_sub, replace=False))
        else:
            rows = np.arange(d.n)
        tree = _grow(
            d.X, resid, rows, rng,
            max_depth=max_depth,
            min_node_size=min_node_size,
            mtry_fraction=colsample,
            l1=alpha_l1,
            l2=lambda_l2,
        )
        trees.append(tree)
        pred = pred + eta * tree.predict(d.X)
    logger.debug(f"GBT fit: {n_trees} trees, eta={eta}, train mse={np.mean((d.y - pred) ** 2):.4g}")
    return GradientBoostedTrees(base=base, eta=eta, trees=tuple(trees), n_features=d.p)
