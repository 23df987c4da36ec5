# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from ..errors import DimensionMismatch, InvalidData


class LearnerKind(str, Enum):
    OLS = "ols"
    ELASTIC_NET = "elastic_net"
    TREE = "tree"
    RANDOM_FOREST = "random_forest"
    GBT = "gbt"
    LINEAR_BOOSTER = "linear_booster"
    NEURAL_NET = "neural_net"


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64).ravel()
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidData(f"X must be a non-empty n x p matrix, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise InvalidData(f"y has {y.shape[0]} entries but X has {X.shape[0]} rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidData("Dataset contains non-finite values")
        names = tuple(self.feature_names) or tuple(f"x{k + 1}" for k in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise InvalidData(f"{len(names)} feature names for {X.shape[1]} columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.X[rows], self.y[rows], self.feature_names)

    def select(self, columns: list[int]) -> "Dataset":
        return Dataset(self.X[:, columns], self.y, tuple(self.feature_names[c] for c in columns))


@runtime_checkable
class TrainedModel(Protocol):
    kind: LearnerKind
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray: ...


def as_matrix(X, n_features: Optional[int] = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if n_features not in (None, 1) else X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f"Expected a 2-d matrix, got {X.ndim} dimensions")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionMismatch(f"Model was trained on {n_features} features, got {X.shape[1]}")
    return X
