#!/usr/bin/env python3
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""
내장 시나리오를 YAML 로 내보내는 스크립트.
- settings.scenario_dir (기본 scenarios/) 에 <name>.yaml 생성
- 이미 같은 내용이면 스킵 (멱등)
- --force 면 내용이 달라도 덮어쓴다
"""
import sys
from pathlib import Path

import yaml

# 프로젝트 루트를 sys.path에 추가
ROOT = Path(__file__).parent
sys.path.insert(0, str(ROOT))

from acebench.config import settings
from acebench.scenarios import builtin, catalog, save_spec, spec_to_dict


def export_all(target: Path, force: bool = False) -> int:
    written = 0
    for name in catalog():
        spec = builtin(name)
        path = target / f"{name}.yaml"
        if path.exists():
            with open(path, encoding="utf-8") as f:
                current = yaml.safe_load(f)
            if current == spec_to_dict(spec):
                print(f"[init_scenarios] {path.name} up to date, skipped.")
                continue
            if not force:
                print(f"[init_scenarios] {path.name} differs from builtin, kept (use --force).")
                continue
        save_spec(spec, path)
        print(f"[init_scenarios] {path.name} written.")
        written += 1
    return written


def main():
    force = "--force" in sys.argv[1:]
    target = Path(settings.scenario_dir)
    if not target.is_absolute():
        target = ROOT / target
    n = export_all(target, force=force)
    print(f"[init_scenarios] Done ({n} file(s) written to {target}).")


if __name__ == "__main__":
    main()
