# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
__version__ = "0.3.0"
