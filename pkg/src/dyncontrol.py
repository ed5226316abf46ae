#!/usr/bin/env python3
"""
动力学控制模块
分段常数控制场下的薛定谔传播、场空间梯度、G 矩阵与梯度上升

约定: ħ = 1, 偶极耦合 H(t) = H0 − ε(t)·μ, μ(t) = −i U†(t) μ U(t)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

from .complexity import HaltSpec
from .errors import DivergenceError, LandscapeError, MemoryGuardError
from .matcore import (
    ComplexMatrix,
    HermitianMatrix,
    RealVector,
    UnitaryMatrix,
    as_hermitian,
    as_unitary,
    check_dims,
    commutator,
    dagger,
    expm_skew,
    frobenius,
)

logger = logging.getLogger(__name__)

G_MATRIX_MAX_DIM = 32
CRITICAL_TOL = 1e-14
IMAG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ControlSystem:
    """漂移哈密顿量 H0、偶极算符 μ、时域 [0, T] 的 M 段均匀网格"""

    h0: HermitianMatrix
    mu: HermitianMatrix
    horizon: float
    steps: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "h0", as_hermitian(self.h0))
        object.__setattr__(self, "mu", as_hermitian(self.mu))
        check_dims("偶极算符 μ", self.h0.shape[0], self.mu.shape[0])
        if self.steps < 2:
            raise LandscapeError(f"时间网格段数 M 必须 ≥ 2, 实际 {self.steps}")
        if not self.horizon > 0.0:
            raise LandscapeError(f"时域 T 必须 > 0, 实际 {self.horizon}")

    @property
    def dim(self) -> int:
        return int(self.h0.shape[0])

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def grid(self) -> RealVector:
        return np.linspace(0.0, self.horizon, self.steps + 1)

    @property
    def midpoints(self) -> RealVector:
        return (np.arange(self.steps) + 0.5) * self.dt

    def hamiltonian(self, amplitude: float) -> HermitianMatrix:
        return self.h0 - amplitude * self.mu


@dataclass(frozen=True, eq=False)
class ControlField:
    """每段一个场幅 ε_m"""

    values: RealVector

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise LandscapeError("控制场必须是一维数组")
        if not np.all(np.isfinite(arr)):
            raise LandscapeError("控制场含有 NaN 或 Inf")
        object.__setattr__(self, "values", arr)

    @classmethod
    def constant(cls, steps: int, amplitude: float = 0.0) -> "ControlField":
        return cls(np.full(steps, float(amplitude)))

    def shifted(self, delta: npt.ArrayLike) -> "ControlField":
        return ControlField(self.values + np.asarray(delta, dtype=np.float64))


class ObjectiveKind(str, Enum):
    PHI1 = "phi1"
    PHI2 = "phi2"


@dataclass(frozen=True, eq=False)
class Objective:
    """Φ₁ = Tr(Uρ₀U†Θ) 或 Φ₂ = Re Tr(AW†U)"""

    kind: ObjectiveKind
    rho0: Optional[HermitianMatrix] = None
    theta: Optional[HermitianMatrix] = None
    target: Optional[UnitaryMatrix] = None
    weight: Optional[HermitianMatrix] = None

    @classmethod
    def observable(cls, rho0: npt.ArrayLike, theta: npt.ArrayLike) -> "Objective":
        r = as_hermitian(rho0)
        t = as_hermitian(theta)
        check_dims("Θ", r.shape[0], t.shape[0])
        return cls(ObjectiveKind.PHI1, rho0=r, theta=t)

    @classmethod
    def gate(cls, target: npt.ArrayLike, weight: Optional[npt.ArrayLike] = None) -> "Objective":
        w = as_unitary(target)
        a = np.eye(w.shape[0], dtype=np.complex128) if weight is None else as_hermitian(weight)
        check_dims("权重 A", w.shape[0], a.shape[0])
        return cls(ObjectiveKind.PHI2, target=w, weight=a)

    @property
    def dim(self) -> int:
        m = self.rho0 if self.kind is ObjectiveKind.PHI1 else self.target
        assert m is not None
        return int(m.shape[0])

    def value(self, u: UnitaryMatrix) -> float:
        if self.kind is ObjectiveKind.PHI1:
            return float(np.real(np.trace(u @ self.rho0 @ dagger(u) @ self.theta)))
        return float(np.real(np.trace(self.weight @ dagger(self.target) @ u)))

    def body_gradient(self, u: UnitaryMatrix) -> ComplexMatrix:
        """∇ 满足 dΦ = Re Tr(∇† X), X = U†dU"""
        if self.kind is ObjectiveKind.PHI1:
            return 2.0 * (dagger(u) @ self.theta @ u) @ self.rho0
        return dagger(u) @ self.target @ self.weight

    def optimum(self) -> float:
        if self.kind is ObjectiveKind.PHI1:
            r = np.sort(np.linalg.eigvalsh(self.rho0))
            t = np.sort(np.linalg.eigvalsh(self.theta))
            return float(np.dot(r, t))
        return float(np.sum(np.abs(np.linalg.eigvalsh(self.weight))))

    def distance(self, u: UnitaryMatrix) -> float:
        """Φ₁: 与最优值之差; Φ₂: ‖U − W‖_F"""
        if self.kind is ObjectiveKind.PHI1:
            return self.optimum() - self.value(u)
        return frobenius(u - self.target)


# ---------------------------------------------------------------- 传播


def _interval_generator(system: ControlSystem, amplitude: float) -> ComplexMatrix:
    return -1j * system.hamiltonian(amplitude) * system.dt


def _check_field(system: ControlSystem, ctrl: ControlField) -> None:
    check_dims("控制场段数", system.steps, ctrl.values.shape[0])


def propagate(system: ControlSystem, ctrl: ControlField) -> Tuple[UnitaryMatrix, List[UnitaryMatrix]]:
    """U_{m+1} = exp(−i(H0 − ε_m μ)Δt)·U_m, U_0 = I"""
    _check_field(system, ctrl)
    u = np.eye(system.dim, dtype=np.complex128)
    grid = [u]
    for amp in ctrl.values:
        u = expm_skew(_interval_generator(system, amp)) @ u
        grid.append(u)
    return u, grid


def heisenberg_dipole(system: ControlSystem, u_grid: List[UnitaryMatrix]) -> List[ComplexMatrix]:
    """μ(t_m) = −i U_m† μ U_m"""
    return [-1j * dagger(u) @ system.mu @ u for u in u_grid]


def _midpoint_dipoles(
    system: ControlSystem, ctrl: ControlField, u_grid: List[UnitaryMatrix]
) -> List[ComplexMatrix]:
    out = []
    for m, amp in enumerate(ctrl.values):
        half = expm_skew(0.5 * _interval_generator(system, amp)) @ u_grid[m]
        out.append(-1j * dagger(half) @ system.mu @ half)
    return out


def interval_derivatives(
    system: ControlSystem, ctrl: ControlField, u_grid: List[UnitaryMatrix]
) -> List[ComplexMatrix]:
    """D_m = U_T†·∂U_T/∂ε_m / Δt (体坐标), 由区间传播子的 Fréchet 导数精确给出"""
    _check_field(system, ctrl)
    check_dims("传播网格长度", system.steps + 1, len(u_grid))
    direction = 1j * system.mu * system.dt
    out = []
    for m, amp in enumerate(ctrl.values):
        dp = la.expm_frechet(_interval_generator(system, amp), direction, compute_expm=False)
        out.append(dagger(u_grid[m + 1]) @ dp @ u_grid[m] / system.dt)
    return out


# ---------------------------------------------------------------- 梯度


def gradient(
    system: ControlSystem,
    ctrl: ControlField,
    objective: Objective,
    quadrature: str = "exact",
) -> RealVector:
    """δΦ/δε 在各段中点的取值 (单位时间的梯度密度)"""
    check_dims("目标函数", system.dim, objective.dim)
    u_t, u_grid = propagate(system, ctrl)
    if quadrature == "exact":
        nabla = objective.body_gradient(u_t)
        derivs = interval_derivatives(system, ctrl, u_grid)
        return np.array([np.real(np.vdot(nabla, d)) for d in derivs])
    if quadrature != "midpoint":
        raise LandscapeError(f"未知求积方式: {quadrature}")

    dipoles = _midpoint_dipoles(system, ctrl, u_grid)
    if objective.kind is ObjectiveKind.PHI1:
        theta_t = dagger(u_t) @ objective.theta @ u_t
        left = commutator(theta_t, objective.rho0)
    else:
        m = objective.weight @ dagger(objective.target) @ u_t
        left = -0.5 * (m - dagger(m))
    values = np.array([np.trace(left @ mu_t) for mu_t in dipoles])
    imag = float(np.max(np.abs(values.imag)))
    if imag > IMAG_TOL * max(1.0, float(np.max(np.abs(values.real)))):
        logger.warning("梯度虚部残差 %.3e 超过 %.0e", imag, IMAG_TOL)
    return values.real


def grad_phi1(
    system: ControlSystem,
    ctrl: ControlField,
    rho0: npt.ArrayLike,
    theta: npt.ArrayLike,
    quadrature: str = "exact",
) -> RealVector:
    """δΦ₁/δε(t) = Tr([Θ(T), ρ₀] μ(t)), Θ(T) = U_T†ΘU_T"""
    return gradient(system, ctrl, Objective.observable(rho0, theta), quadrature)


def grad_phi2(
    system: ControlSystem,
    ctrl: ControlField,
    target: npt.ArrayLike,
    weight: Optional[npt.ArrayLike] = None,
    quadrature: str = "exact",
) -> RealVector:
    """δΦ₂/δε(t) = −½ Tr((AW†U − U†WA) μ(t))"""
    return gradient(system, ctrl, Objective.gate(target, weight), quadrature)


def fd_gradient(
    system: ControlSystem, ctrl: ControlField, objective: Objective, h: float = 1e-6
) -> RealVector:
    """中心差分梯度密度 (Φ(ε + h e_m) − Φ(ε − h e_m)) / (2h Δt)"""
    out = np.empty(system.steps)
    for m in range(system.steps):
        bump = np.zeros(system.steps)
        bump[m] = h
        up = objective.value(propagate(system, ctrl.shifted(bump))[0])
        down = objective.value(propagate(system, ctrl.shifted(-bump))[0])
        out[m] = (up - down) / (2.0 * h * system.dt)
    return out


# ---------------------------------------------------------------- G 矩阵


def _realify(v: ComplexMatrix) -> RealVector:
    flat = v.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


@dataclass(frozen=True, eq=False)
class GMatrix:
    """G_{ij,pq} = ∫ μ_ij(t) μ_pq(t) dt 及其实化形式"""

    entries: ComplexMatrix
    real: npt.NDArray[np.float64]
    dim: int

    def entry(self, i: int, j: int, p: int, q: int) -> complex:
        """按 1 起始的矩阵下标取 G_{ij,pq}"""
        n = self.dim
        return complex(self.entries[(i - 1) * n + (j - 1), (p - 1) * n + (q - 1)])

    @property
    def symmetry_residual(self) -> float:
        return frobenius(self.entries - self.entries.T)

    def apply(self, nabla: ComplexMatrix) -> RealVector:
        """实化表示下的 G·vec_r(∇)"""
        return self.real @ _realify(nabla)


def g_matrix(
    system: ControlSystem,
    u_grid: List[UnitaryMatrix],
    ctrl: Optional[ControlField] = None,
) -> GMatrix:
    """不给控制场时对网格上的 μ(t_m) 做梯形求积; 给出控制场时用区间精确偶极 D_m"""
    n = system.dim
    if n > G_MATRIX_MAX_DIM:
        raise MemoryGuardError(n, G_MATRIX_MAX_DIM)
    check_dims("传播网格长度", system.steps + 1, len(u_grid))
    if ctrl is None:
        dipoles = heisenberg_dipole(system, u_grid)
        weights = np.full(len(dipoles), system.dt)
        weights[[0, -1]] *= 0.5
    else:
        dipoles = interval_derivatives(system, ctrl, u_grid)
        weights = np.full(len(dipoles), system.dt)

    vecs = np.array([d.reshape(-1) for d in dipoles])
    entries = (vecs.T * weights) @ vecs
    entries = 0.5 * (entries + entries.T)
    real_vecs = np.array([_realify(d) for d in dipoles])
    real = (real_vecs.T * weights) @ real_vecs
    return GMatrix(entries=entries, real=0.5 * (real + real.T), dim=n)


def check_chain_rule(
    system: ControlSystem, ctrl: ControlField, objective: Objective, ds: float = 1e-4
) -> float:
    """沿梯度走一步 δs, 比较 vec_r(U_T†ΔU_T)/δs 与 G·∇Φ; 临界点返回 nan"""
    if not 0.0 < ds <= 1e-4:
        raise LandscapeError(f"δs 必须在 (0, 1e-4] 内, 实际 {ds}")
    u_t, u_grid = propagate(system, ctrl)
    g = g_matrix(system, u_grid, ctrl)
    predicted = g.apply(objective.body_gradient(u_t))
    scale = float(np.linalg.norm(predicted))
    if scale < CRITICAL_TOL:
        logger.info("临界点: ΔU 与 G∇Φ 同时为零, 残差无定义")
        return float("nan")
    step = gradient(system, ctrl, objective)
    u_new, _ = propagate(system, ctrl.shifted(ds * step))
    observed = _realify(dagger(u_t) @ u_new - np.eye(system.dim)) / ds
    return float(np.linalg.norm(observed - predicted)) / scale


# ---------------------------------------------------------------- 梯度上升


@dataclass
class AscentStep:
    iteration: int
    phi: float
    grad_norm: float
    distance: float


@dataclass
class AscentResult:
    control: ControlField
    history: List[AscentStep] = field(default_factory=list)
    status: str = "max_iters"
    sigma: float = 1.0


def gradient_ascent(
    system: ControlSystem,
    field0: ControlField,
    objective: Objective,
    halt: Optional[HaltSpec] = None,
    max_iters: int = 10000,
    sigma: float = 1.0,
    grad_tol: float = 1e-8,
    max_rejections: int = 10,
) -> AscentResult:
    """显式 Euler 梯度上升 ε ← ε + σ·∇Φ, 回溯调整 σ"""
    if not sigma > 0.0:
        raise LandscapeError(f"步长 σ 必须 > 0, 实际 {sigma}")
    ctrl = field0
    result = AscentResult(control=ctrl, sigma=sigma)
    phi = objective.value(propagate(system, ctrl)[0])
    rejections = 0

    for it in range(max_iters + 1):
        grad = gradient(system, ctrl, objective)
        grad_norm = float(np.sqrt(np.sum(grad**2) * system.dt))
        u_t = propagate(system, ctrl)[0]
        dist = objective.distance(u_t)
        result.history.append(AscentStep(it, phi, grad_norm, dist))
        if grad_norm < grad_tol:
            result.status = "gradient_tol"
            break
        if halt is not None and dist < halt.epsilon_p:
            result.status = "halted"
            break
        if it == max_iters:
            break

        while True:
            trial = ctrl.shifted(sigma * grad)
            trial_phi = objective.value(propagate(system, trial)[0])
            if trial_phi >= phi - 1e-14:
                ctrl, phi = trial, trial_phi
                sigma *= 1.5
                rejections = 0
                break
            sigma *= 0.5
            rejections += 1
            logger.debug("第 %d 步 Φ 下降, σ 减半为 %.3e", it, sigma)
            if rejections >= max_rejections:
                raise DivergenceError(
                    f"连续 {rejections} 次步长回溯后 Φ 仍下降 (σ = {sigma:.3e}), 步长过大或梯度有误"
                )

    result.control = ctrl
    result.sigma = sigma
    logger.info("梯度上升结束: %s, Φ = %.12g, 迭代 %d 次", result.status, phi, len(result.history) - 1)
    return result
