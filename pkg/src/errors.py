#!/usr/bin/env python3
"""
异常模块
定义景观计算中用到的全部异常类型
"""

from __future__ import annotations

from typing import List, Optional, Tuple


class LandscapeError(ValueError):
    """所有景观计算异常的基类"""


class NotHermitianError(LandscapeError):
    """输入矩阵不是厄米矩阵"""

    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(f"矩阵不是厄米矩阵: 相对残差 {residual:.3e} 超过容差 {tol:.1e}")


class NotUnitaryError(LandscapeError):
    """输入矩阵不是酉矩阵"""

    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(f"矩阵不是酉矩阵: ‖M†M − I‖_F = {residual:.3e} 超过容差 {tol:.1e}")


class NotAntiHermitianError(LandscapeError):
    """输入矩阵不是反厄米矩阵"""

    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(f"矩阵不是反厄米矩阵: 相对残差 {residual:.3e} 超过容差 {tol:.1e}")


class DimensionMismatchError(LandscapeError):
    """维度不一致"""

    def __init__(self, what: str, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} 维度不一致: 期望 {expected}, 实际 {actual}")


class SingularResolventError(LandscapeError):
    """解析门流的预解矩阵奇异"""

    def __init__(self, s: float, condition: float):
        self.s = s
        self.condition = condition
        super().__init__(
            f"s = {s:.6g} 处 cosh(s)I + sinh(s)W†U₀ 的条件数 {condition:.3e} 超过 1e12"
        )


class SamplingDensityError(LandscapeError):
    """轨迹采样过稀, 无法做路径长度积分"""

    def __init__(self, required: float, actual: float):
        self.required = required
        self.actual = actual
        super().__init__(
            f"轨迹采样过稀: 需要每单位 s 至少 {required:g} 个点, 最大步长对应 {actual:.1f} 个点"
        )


class DivergenceError(LandscapeError):
    """梯度上升发散 (步长过大)"""


class MemoryGuardError(LandscapeError):
    """超出 G 矩阵的内存保护上限"""

    def __init__(self, dim: int, limit: int):
        self.dim = dim
        self.limit = limit
        super().__init__(f"G 矩阵需要 N⁴ 内存: N = {dim} 超过上限 N ≤ {limit}")


class ConfigError(LandscapeError):
    """实验配置无效"""

    def __init__(self, diagnostics: List[Tuple[str, str, Optional[int]]]):
        self.diagnostics = diagnostics
        lines = []
        for field, message, line in diagnostics:
            where = f"第 {line} 行 " if line is not None else ""
            lines.append(f"{where}{field}: {message}")
        super().__init__("配置无效:\n" + "\n".join(lines))
