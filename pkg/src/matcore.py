#!/usr/bin/env python3
"""
矩阵核心模块
提供复稠密线性代数基础: 厄米/酉矩阵校验、谱分解、矩阵指数、范数和随机实例生成
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

from .errors import (
    DimensionMismatchError,
    LandscapeError,
    NotAntiHermitianError,
    NotHermitianError,
    NotUnitaryError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
HermitianMatrix = ComplexMatrix
UnitaryMatrix = ComplexMatrix
RealVector = npt.NDArray[np.float64]

# 容差
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
ANTI_HERMITIAN_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
PHASE_SNAP = 1e-12
MAX_DIM = 512


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    """共轭转置"""
    return m.conj().T


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """对易子 [A, B] = AB − BA"""
    return a @ b - b @ a


def frobenius(m: np.ndarray) -> float:
    """Frobenius 范数"""
    return float(np.linalg.norm(m))


def hermiticity_residual(m: ComplexMatrix) -> float:
    """相对厄米残差 ‖M − M†‖_F / ‖M‖_F"""
    scale = frobenius(m)
    if scale == 0.0:
        return 0.0
    return frobenius(m - dagger(m)) / scale


def unitarity_residual(u: ComplexMatrix) -> float:
    """酉残差 ‖U†U − I‖_F"""
    return frobenius(dagger(u) @ u - np.eye(u.shape[0]))


def _as_square(m: npt.ArrayLike) -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise LandscapeError(f"需要方阵, 实际形状 {arr.shape}")
    if arr.shape[0] == 0:
        raise LandscapeError("矩阵维度必须 ≥ 1")
    if not np.all(np.isfinite(arr)):
        raise LandscapeError("矩阵含有 NaN 或 Inf")
    return arr


def as_hermitian(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> HermitianMatrix:
    """校验并返回厄米矩阵 (对称化消除舍入误差)"""
    arr = _as_square(m)
    residual = hermiticity_residual(arr)
    if residual > tol:
        raise NotHermitianError(residual, tol)
    return 0.5 * (arr + dagger(arr))


def as_unitary(m: npt.ArrayLike, tol: float = UNITARY_TOL) -> UnitaryMatrix:
    """校验并返回酉矩阵"""
    arr = _as_square(m)
    residual = unitarity_residual(arr)
    if residual > tol:
        raise NotUnitaryError(residual, tol)
    return arr


def as_anti_hermitian(m: npt.ArrayLike, tol: float = ANTI_HERMITIAN_TOL) -> ComplexMatrix:
    """校验并返回反厄米矩阵"""
    arr = _as_square(m)
    # 相对残差, 范数小于 1 时按绝对残差计
    residual = frobenius(arr + dagger(arr)) / max(frobenius(arr), 1.0)
    if residual > tol:
        raise NotAntiHermitianError(residual, tol)
    return 0.5 * (arr - dagger(arr))


def check_dims(what: str, expected: int, actual: int) -> None:
    """维度一致性检查"""
    if expected != actual:
        raise DimensionMismatchError(what, expected, actual)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """降序排列的实谱及其特征向量框架"""

    values: RealVector
    frame: UnitaryMatrix
    degeneracy_tol: float

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def multiplicity(self) -> int:
        """最大特征值的简并度 k"""
        top = self.values[0]
        return int(np.count_nonzero(top - self.values <= self.degeneracy_tol))

    @property
    def gap(self) -> float:
        """μ = λ_(1) − λ_{k+1}; 整个谱简并时为 0"""
        k = self.multiplicity
        if k >= self.dim:
            return 0.0
        return float(self.values[0] - self.values[k])

    def matrix(self) -> HermitianMatrix:
        """重建 V diag(λ) V†"""
        return (self.frame * self.values) @ dagger(self.frame)

    def shifted(self, c: float) -> "Spectrum":
        """整体平移 λ → λ + c"""
        return Spectrum(self.values + c, self.frame, self.degeneracy_tol)


def default_degeneracy_tol(values: RealVector) -> float:
    return 1e-9 * max(1.0, abs(float(values[0])))


def spectrum_from_values(values: npt.ArrayLike, frame: Optional[ComplexMatrix] = None) -> Spectrum:
    """由特征值 (任意顺序) 构造谱; 默认框架为单位阵"""
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise LandscapeError("特征值必须是非空一维数组")
    order = np.argsort(-vals, kind="stable")
    if frame is None:
        basis = np.eye(vals.size, dtype=np.complex128)
    else:
        basis = as_unitary(frame)
        check_dims("谱框架", vals.size, basis.shape[0])
    basis = basis[:, order]
    vals = vals[order]
    return Spectrum(vals, basis, default_degeneracy_tol(vals))


def eigh(m: npt.ArrayLike, degeneracy_tol: Optional[float] = None) -> Spectrum:
    """厄米矩阵谱分解, 特征值降序"""
    h = as_hermitian(m)
    values, vectors = np.linalg.eigh(h)
    values = np.ascontiguousarray(values[::-1])
    vectors = np.ascontiguousarray(vectors[:, ::-1])
    tol = default_degeneracy_tol(values) if degeneracy_tol is None else degeneracy_tol
    return Spectrum(values, vectors, tol)


class EigenPhases(NamedTuple):
    """酉矩阵的本征相位 W = V† diag(e^{−iθ_k}) V"""

    phases: RealVector
    frame: UnitaryMatrix


def canonical_phases(theta: npt.ArrayLike) -> RealVector:
    """把相位规范到 (−π, π], 在 ±π 处统一取 +π"""
    t = np.angle(np.exp(1j * np.asarray(theta, dtype=np.float64)))
    return np.where(np.abs(np.abs(t) - np.pi) <= PHASE_SNAP, np.pi, t)


def phase_factors(theta: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """e^{−iθ}, 在 θ = π 处精确取 −1"""
    t = np.asarray(theta, dtype=np.float64)
    z = np.exp(-1j * t)
    return np.where(t == np.pi, -1.0 + 0.0j, z)


def eig_unitary(w: npt.ArrayLike) -> EigenPhases:
    """酉矩阵对角化 (复 Schur 分解, 对正规矩阵即对角化)"""
    u = as_unitary(w)
    t, z = la.schur(u, output="complex")
    eigvals = np.diagonal(t)
    phases = canonical_phases(-np.angle(eigvals))
    frame = dagger(z)
    rebuilt = dagger(frame) @ (phase_factors(phases)[:, None] * frame)
    residual = frobenius(rebuilt - u)
    if residual > RECONSTRUCTION_TOL:
        logger.warning("酉对角化重建残差 %.3e 超过 %.1e", residual, RECONSTRUCTION_TOL)
    return EigenPhases(phases, frame)


def unitary_from_phases(phases: npt.ArrayLike, frame: ComplexMatrix) -> UnitaryMatrix:
    """由本征相位和框架重建 V† diag(e^{−iθ}) V"""
    v = as_unitary(frame)
    z = phase_factors(phases)
    check_dims("相位", v.shape[0], z.shape[0])
    return dagger(v) @ (z[:, None] * v)


def expm_skew(omega: npt.ArrayLike) -> UnitaryMatrix:
    """反厄米矩阵的指数 (谱方法, 结果严格为酉)"""
    o = as_anti_hermitian(omega)
    h = 1j * o
    h = 0.5 * (h + dagger(h))
    values, vectors = np.linalg.eigh(h)
    return (vectors * np.exp(-1j * values)) @ dagger(vectors)


class SampleKind(str, Enum):
    """随机实例类型"""

    HAAR_UNITARY = "haar_unitary"
    GUE_HERMITIAN = "gue_hermitian"
    SPECTRUM_UNIFORM = "spectrum_uniform"


def make_rng(seed: int) -> np.random.Generator:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise LandscapeError(f"种子必须是整数, 实际 {type(seed).__name__}")
    if not 0 <= int(seed) < 2**64:
        raise LandscapeError(f"种子必须在 [0, 2^64) 内, 实际 {seed}")
    return np.random.default_rng(int(seed))


def haar_unitary(n: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar 随机酉矩阵 (复高斯 QR 加相位修正)"""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def gue_hermitian(n: int, rng: np.random.Generator) -> HermitianMatrix:
    """GUE 随机厄米矩阵"""
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    return 0.5 * (a + dagger(a))


def sample(
    kind: Union[SampleKind, str],
    n: int,
    seed: int,
    a: float = 0.0,
    b: float = 1.0,
) -> Union[ComplexMatrix, Spectrum]:
    """按 (kind, N, seed) 确定性地生成随机实例"""
    kind = SampleKind(kind)
    if n < 1:
        raise LandscapeError(f"维度 N 必须 ≥ 1, 实际 {n}")
    if n > MAX_DIM:
        raise LandscapeError(f"维度 N = {n} 超过桌面规模上限 {MAX_DIM}")
    rng = make_rng(seed)
    if kind is SampleKind.HAAR_UNITARY:
        return haar_unitary(n, rng)
    if kind is SampleKind.GUE_HERMITIAN:
        return gue_hermitian(n, rng)
    if not a <= b:
        raise LandscapeError(f"均匀谱区间无效: [{a}, {b}]")
    return spectrum_from_values(rng.uniform(a, b, size=n))


def instance_seed(study_seed: int, n: int, index: int) -> int:
    """由 (研究种子, N, 序号) 派生实例种子"""
    seq = np.random.SeedSequence([int(study_seed), int(n), int(index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])
