#!/usr/bin/env python3
"""
测试公共配置
把仓库根目录加入 sys.path (与 tools/ 下脚本相同), 并提供共享的随机实例
"""

import os
import sys

import numpy as np
import pytest

# 添加仓库根目录, 以包的形式导入 src
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.flows import GateProblem, ObservableProblem  # noqa: E402
from src.matcore import haar_unitary  # noqa: E402

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def two_level_problem():
    """λ = (1, 0), 均匀初始布居"""
    return ObservableProblem.from_populations([1.0, 0.0], [0.5, 0.5])


@pytest.fixture
def random_observable(rng):
    values = rng.uniform(0.0, 1.0, size=5)
    x0 = rng.dirichlet(np.ones(5))
    return ObservableProblem.from_populations(values, x0)


@pytest.fixture
def random_gate(rng):
    return GateProblem.create(haar_unitary(3, rng))
