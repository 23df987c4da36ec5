# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""실험 하네스. replicate 와 탐색 draw 는 서로 독립인 난수 스트림을 쓰므로
worker thread 에 그대로 나눠 줄 수 있다. 결과는 항상 입력 순서로 모은다."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from ..config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int]) -> int:
    n = settings.threads if threads is None else threads
    return max(1, int(n))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
