# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    threads: int = 1
    log_level: str = "INFO"
    h_fraction: float = 0.1
    density_floor_fraction: float = 1e-3
    replicates: int = 100
    search_draws: int = 100
    search_reps: int = 5
    surrogate_trees: int = 500
    surrogate_min_node_size: int = 5
    pivot_tol: float = 1e-12  # Cholesky pivot
    torch_threads: int = 1  # NN 연산의 intra-op thread. replicate 병렬은 threads 가 맡는다
    scenario_dir: str = "scenarios"

    model_config = SettingsConfigDict(
        env_prefix="ACEBENCH_",
        env_file=".env",
        env_file_encoding="utf-8",
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
