# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
import numpy as np
import pytest

from acebench.learners.base import Dataset
from acebench.randkit import split_rng
from acebench.scenarios import builtin, gen_linear


@pytest.fixture
def rng():
    return split_rng(1234, 0)


@pytest.fixture
def linear_data():
    """y = 1 + 2 x1 - x2 + 0.5 x3 + N(0, 0.1), n=200."""
    g = np.random.default_rng(7)
    X = g.standard_normal((200, 3))
    y = 1.0 + X @ np.array([2.0, -1.0, 0.5]) + g.normal(0.0, 0.1, 200)
    return Dataset(X, y)


@pytest.fixture(scope="session")
def collinear09():
    return gen_linear(builtin("collinear09"), 1000, split_rng(2024, 0))


@pytest.fixture(scope="session")
def base5():
    return gen_linear(builtin("base5"), 1000, split_rng(2024, 1))
