# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
import sys

from .cli import main

sys.exit(main())
