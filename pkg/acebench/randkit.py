# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""결정적 난수 스트림과 시나리오용 샘플러.

스트림은 (master_seed, stream_id) 쌍에서 SeedSequence 로 만든 PCG64 Generator 이다.
같은 쌍이면 플랫폼과 무관하게 같은 수열을 낸다. 하나의 스트림을 여러 스레드가
동시에 쓰면 안 되며, 병렬화는 replicate 마다 stream_id 를 하나씩 배정해서 한다.
"""
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from .config import settings
from .errors import InvalidCovariance, NotPositiveDefinite

RngStream = np.random.Generator

SYMMETRY_TOL = 1e-12
EIGEN_TOL = -1e-10


def split_rng(master_seed: int, stream_id: int) -> RngStream:
    ss = np.random.SeedSequence([int(master_seed), int(stream_id)])
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(master_seed: int, *path: int) -> int:
    """중첩 실험(탐색 draw → replicate)용 하위 master seed."""
    ss = np.random.SeedSequence([int(master_seed), *[int(p) for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CovMatrix:
    entries: np.ndarray
    correlation: bool = False
    dim: int = field(init=False)

    def __post_init__(self):
        s = np.asarray(self.entries, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 1:
            raise InvalidCovariance(f"Covariance must be a square matrix, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InvalidCovariance("Covariance has non-finite entries")
        if np.max(np.abs(s - s.T)) > SYMMETRY_TOL:
            raise InvalidCovariance("Covariance is not symmetric")
        if np.linalg.eigvalsh(s).min() < EIGEN_TOL:
            raise InvalidCovariance("Covariance is not positive semidefinite")
        if self.correlation and np.max(np.abs(np.diag(s) - 1.0)) > SYMMETRY_TOL:
            raise InvalidCovariance("Correlation matrix must have a unit diagonal")
        s.setflags(write=False)
        object.__setattr__(self, "entries", s)
        object.__setattr__(self, "dim", s.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "CovMatrix":
        return cls(np.eye(dim), correlation=True)


CovLike = Union[CovMatrix, np.ndarray, list]


def _entries(S: CovLike) -> np.ndarray:
    if isinstance(S, CovMatrix):
        return S.entries
    return CovMatrix(np.asarray(S, dtype=np.float64)).entries


def cholesky(S: CovLike) -> np.ndarray:
    """하삼각 L (L @ L.T == S). 피벗이 pivot_tol 이하이면 NotPositiveDefinite."""
    s = np.asarray(S.entries if isinstance(S, CovMatrix) else S, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidCovariance(f"Covariance must be a square matrix, got shape {s.shape}")
    try:
        L = scipy.linalg.cholesky(s, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NotPositiveDefinite(f"Cholesky failed: {e}") from e
    pivots = np.diag(L) ** 2
    if np.any(pivots <= settings.pivot_tol):
        k = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"Pivot {k} is {pivots[k]:.3e} (<= {settings.pivot_tol:g})")
    return L


def mvn_sample(mean, S: CovLike, n: int, rng: RngStream) -> np.ndarray:
    L = cholesky(_entries(S))
    p = L.shape[0]
    mu = np.broadcast_to(np.asarray(mean, dtype=np.float64), (p,))
    z = rng.standard_normal((n, p))
    return mu + z @ L.T


def lkj_sample_corr(dim: int, eta: float, rng: RngStream) -> CovMatrix:
    """LKJ(eta) 상관행렬, onion 방식.

    부분상관을 Beta 분포에서 뽑아 차원을 하나씩 늘려 간다. dim=2 이면
    (r + 1) / 2 ~ Beta(eta, eta).
    """
    if dim < 2:
        raise InvalidCovariance(f"LKJ dimension must be >= 2, got {dim}")
    if eta <= 0:
        raise InvalidCovariance(f"LKJ eta must be > 0, got {eta}")

    beta = eta - 1.0 + dim / 2.0
    r12 = 2.0 * rng.beta(beta, beta) - 1.0
    # P 의 열이 상관행렬의 Cholesky 인자(상삼각) 를 이룬다
    P = np.zeros((dim, dim))
    P[0, 0] = 1.0
    P[0, 1] = r12
    P[1, 1] = np.sqrt(1.0 - r12 ** 2)
    for m in range(2, dim):
        beta -= 0.5
        y = rng.beta(m / 2.0, beta)
        z = rng.standard_normal(m)
        z /= np.sqrt(z @ z)
        P[:m, m] = np.sqrt(y) * z
        P[m, m] = np.sqrt(1.0 - y)
    C = P.T @ P
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0)
    return CovMatrix(C, correlation=True)


def lognormal_sample(meanlog: float, sdlog: float, n: int, rng: RngStream) -> np.ndarray:
    if sdlog <= 0:
        raise ValueError(f"sdlog must be > 0, got {sdlog}")
    return rng.lognormal(mean=meanlog, sigma=sdlog, size=n)
