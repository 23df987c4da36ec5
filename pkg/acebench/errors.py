# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""acebench 예외 계층.

모든 예외는 CLI 종료 코드(exit_code)를 갖는다.
0 = 성공, 2 = 사용법 오류, 3 = IO 오류, 1 = 그 외 계산 오류.
"""
from typing import Any, Optional

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


class AceBenchError(Exception):
    exit_code: int = EXIT_FAILURE

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class NotPositiveDefinite(AceBenchError):
    pass


class InvalidCovariance(AceBenchError):
    exit_code = EXIT_USAGE


class RankDeficient(AceBenchError):
    def __init__(self, detail: str, rank: int, required: int):
        super().__init__(detail)
        self.rank = rank
        self.required = required


class NotConverged(AceBenchError):
    """max_iter 내에 수렴하지 못함. partial 에 마지막 상태를 담는다."""

    def __init__(self, detail: str, partial: Any = None):
        super().__init__(detail)
        self.partial = partial


class DimensionMismatch(AceBenchError):
    exit_code = EXIT_USAGE


class ZeroVariance(AceBenchError):
    def __init__(self, detail: str, index: Optional[int] = None):
        super().__init__(detail)
        self.index = index


class SameFeature(AceBenchError):
    exit_code = EXIT_USAGE


class UnknownScenario(AceBenchError):
    exit_code = EXIT_USAGE

    def __init__(self, name: str, catalog: list[str]):
        super().__init__(f"Unknown scenario '{name}'. Available: {', '.join(catalog)}")
        self.name = name
        self.catalog = catalog


class NoAnalyticTruth(AceBenchError):
    pass


class DivergedLoss(AceBenchError):
    def __init__(self, detail: str, step: int):
        super().__init__(detail)
        self.step = step


class InvalidData(AceBenchError):
    exit_code = EXIT_USAGE


class UnknownLearner(AceBenchError):
    exit_code = EXIT_USAGE

    def __init__(self, name: str, catalog: list[str]):
        super().__init__(f"Unknown learner '{name}'. Available: {', '.join(catalog)}")
        self.name = name
        self.catalog = catalog


class UsageError(AceBenchError):
    exit_code = EXIT_USAGE
