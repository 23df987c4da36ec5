# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""결과 파일 쓰기: CSV (LF, '.' 소수점, header), JSON run manifest, xlsx 묶음."""
import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import openpyxl
import pandas as pd
from openpyxl.utils import get_column_letter
from pydantic import BaseModel, Field

from . import __version__

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_SUFFIX = ".manifest.json"


class RunManifest(BaseModel):
    command: str
    argv: list[str]
    master_seed: int
    threads: int = 1
    scenario: Optional[dict[str, Any]] = None
    learners: list[dict[str, Any]] = Field(default_factory=list)
    version: str = __version__
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    outputs: list[str] = Field(default_factory=list)


def write_csv(df: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n", float_format="%.17g", na_rep="NA")
    logger.info(f"Wrote {path} ({len(df)} rows)")
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, na_values=["NA"], keep_default_na=False)


def manifest_path(csv_path: PathLike) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(manifest.model_dump_json(indent=2))
        f.write("\n")
    logger.info(f"Wrote manifest {path}")
    return path


def read_manifest(path: PathLike) -> RunManifest:
    with open(path, encoding="utf-8") as f:
        return RunManifest.model_validate(json.load(f))


def _cell(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_xlsx(tables: dict[str, pd.DataFrame], path: PathLike) -> Path:
    """표 하나당 시트 하나. 시트 이름은 31자 제한."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    wb = openpyxl.Workbook()
    wb.remove(wb.active)
    for name, df in tables.items():
        ws = wb.create_sheet(name[:31])
        ws.append([str(c) for c in df.columns])
        for row in df.itertuples(index=False):
            ws.append([_cell(v) for v in row])
        for ci, col in enumerate(df.columns, start=1):
            ws.column_dimensions[get_column_letter(ci)].width = max(10, len(str(col)) + 2)
        ws.freeze_panes = "A2"
    wb.save(path)
    logger.info(f"Wrote workbook {path} ({len(tables)} sheets)")
    return path
