# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from ..errors import NotConverged, RankDeficient
from ..randkit import RngStream
from .base import Dataset, LearnerKind, as_matrix

logger = logging.getLogger(__name__)


class OlsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ElasticNetConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    alpha: float = Field(default=0.2, ge=0.0, le=1.0)
    lambda_: Optional[float] = Field(default=None, ge=0.0, alias="lambda")  # None 이면 CV
    folds: int = Field(default=10, ge=2)
    tol: float = Field(default=1e-7, gt=0.0)
    max_iter: int = Field(default=100_000, ge=1)


class LinearBoosterConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_steps: int = Field(default=200, ge=1)
    eta: float = Field(default=1.0, gt=0.0)


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    converged: bool = True
    iterations: int = 0
    kind: LearnerKind = LearnerKind.OLS

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=np.float64).ravel()
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[0]

    def predict(self, X) -> np.ndarray:
        X = as_matrix(X, self.n_features)
        return self.intercept + X @ self.coefficients


# ------------------------------------------------------------------
# OLS
# ------------------------------------------------------------------

def fit_ols(d: Dataset) -> LinearModel:
    """열 피벗 QR 로 최소제곱. rank([1|X]) < p+1 이면 RankDeficient (유사역행렬 없음)."""
    A = np.hstack([np.ones((d.n, 1)), d.X])
    required = A.shape[1]
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < required:
        raise RankDeficient(
            f"Design matrix [1|X] has rank {rank} < {required} (n={d.n}, p={d.p})",
            rank=rank,
            required=required,
        )
    z = scipy.linalg.solve_triangular(R[:required, :required], Q.T @ d.y)
    beta = np.empty(required)
    beta[piv] = z
    logger.debug(f"OLS fit: n={d.n} p={d.p}")
    return LinearModel(intercept=beta[0], coefficients=beta[1:], kind=LearnerKind.OLS)


# ------------------------------------------------------------------
# Elastic net (coordinate descent, covariance updates)
# ------------------------------------------------------------------

def soft_threshold(z, gamma: float):
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


def _standardized(d: Dataset):
    x_mean = d.X.mean(axis=0)
    x_sd = d.X.std(axis=0)  # glmnet 과 같은 1/n 규약
    x_sd = np.where(x_sd > 0, x_sd, 1.0)
    Xs = (d.X - x_mean) / x_sd
    y_mean = d.y.mean()
    return Xs, d.y - y_mean, x_mean, x_sd, y_mean


def fit_elastic_net(
    d: Dataset,
    alpha: float = 0.2,
    lambda_: float = 0.0,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> LinearModel:
    """(1/2n)||y - b0 - Xb||^2 + lambda * [alpha*|b|_1 + (1-alpha)/2*|b|_2^2].

    내부 표준화 후 좌표하강, 절편은 벌점 없음. 계수는 원래 척도로 보고한다.
    수렴 기준: 한 sweep 동안 계수 변화의 최댓값 < tol.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda must be >= 0, got {lambda_}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")

    Xs, yc, x_mean, x_sd, y_mean = _standardized(d)
    n, p = Xs.shape
    G = Xs.T @ Xs / n
    c = Xs.T @ yc / n
    l1 = lambda_ * alpha
    denom = np.diag(G) + lambda_ * (1.0 - alpha)
    denom = np.where(denom > 0, denom, 1.0)

    beta = np.zeros(p)
    grad = c.copy()  # grad = c - G @ beta
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        max_delta = 0.0
        for j in range(p):
            old = beta[j]
            new = soft_threshold(grad[j] + G[j, j] * old, l1) / denom[j]
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                grad -= G[:, j] * delta
                max_delta = max(max_delta, abs(delta))
        if max_delta < tol:
            converged = True
            break

    coef = beta / x_sd
    model = LinearModel(
        intercept=y_mean - x_mean @ coef,
        coefficients=coef,
        converged=converged,
        iterations=sweeps,
        kind=LearnerKind.ELASTIC_NET,
    )
    if not converged:
        raise NotConverged(
            f"Elastic net did not converge in {max_iter} sweeps (lambda={lambda_}, alpha={alpha})",
            partial=model,
        )
    logger.debug(f"Elastic net converged in {sweeps} sweeps (lambda={lambda_:.4g}, alpha={alpha})")
    return model


def lambda_path(d: Dataset, alpha: float, n_lambda: int = 50, ratio: float = 1e-3) -> np.ndarray:
    """glmnet 식 lambda 격자: lambda_max 에서 lambda_max * ratio 까지 로그 간격."""
    Xs, yc, *_ = _standardized(d)
    lam_max = np.max(np.abs(Xs.T @ yc)) / (d.n * max(alpha, 1e-3))
    lam_max = max(lam_max, 1e-6)
    return np.geomspace(lam_max, lam_max * ratio, n_lambda)


def cv_select_lambda(
    d: Dataset,
    alpha: float,
    folds: int,
    lambda_grid: Optional[Sequence[float]],
    rng: RngStream,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> float:
    """k-fold CV 로 평균 out-of-fold 제곱오차가 최소인 lambda.

    동률이면 가장 큰 lambda (가장 단순한 모형) 를 고른다.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    grid = np.asarray(lambda_path(d, alpha) if lambda_grid is None else lambda_grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    folds = min(folds, d.n)
    assignment = rng.permutation(np.arange(d.n) % folds)

    errors = np.zeros(grid.size)
    for f in range(folds):
        test = assignment == f
        train = d.subset(~test)
        for i, lam in enumerate(grid):
            m = fit_elastic_net(train, alpha=alpha, lambda_=float(lam), tol=tol, max_iter=max_iter)
            resid = d.y[test] - m.predict(d.X[test])
            errors[i] += np.sum(resid ** 2)
    errors /= d.n

    best = errors.min()
    candidates = np.flatnonzero(errors <= best)
    chosen = float(grid[candidates].max())
    logger.debug(f"CV selected lambda={chosen:.4g} (alpha={alpha}, folds={folds})")
    return chosen


# ------------------------------------------------------------------
# Linear booster
# ------------------------------------------------------------------

@dataclass(frozen=True)
class BoosterTrace:
    cumulative: np.ndarray   # (n_steps, p) 각 step 이후 누적 계수
    increments: np.ndarray   # (n_steps, p) 각 ensemble member 의 계수
    chosen: np.ndarray       # (n_steps,) 선택된 변수


def fit_linear_booster(
    d: Dataset,
    n_steps: int = 200,
    eta: float = 1.0,
    rng: Optional[RngStream] = None,
) -> tuple[LinearModel, BoosterTrace]:
    """잔차에 대한 단변량 최소제곱 부스팅.

    각 step 은 잔차와의 절대 상관이 가장 큰 변수 하나를 골라 그 변수의
    최소제곱 기울기의 eta 배만큼 계수를 더한다. rng 는 인터페이스 통일용(결정적 알고리즘).
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    x_mean = d.X.mean(axis=0)
    Xc = d.X - x_mean
    y_mean = d.y.mean()
    resid = d.y - y_mean
    ss = np.einsum("ij,ij->j", Xc, Xc)
    norms = np.sqrt(np.where(ss > 0, ss, np.inf))

    beta = np.zeros(d.p)
    cumulative = np.zeros((n_steps, d.p))
    increments = np.zeros((n_steps, d.p))
    chosen = np.zeros(n_steps, dtype=np.int64)
    for t in range(n_steps):
        cov = Xc.T @ resid
        j = int(np.argmax(np.abs(cov) / norms))
        step = eta * cov[j] / ss[j] if ss[j] > 0 else 0.0
        beta[j] += step
        resid = resid - step * Xc[:, j]
        increments[t, j] = step
        cumulative[t] = beta
        chosen[t] = j

    model = LinearModel(
        intercept=y_mean - x_mean @ beta,
        coefficients=beta,
        iterations=n_steps,
        kind=LearnerKind.LINEAR_BOOSTER,
    )
    return model, BoosterTrace(cumulative=cumulative, increments=increments, chosen=chosen)
