#!/usr/bin/env python3
"""
梯度流模块
提供可观测量流和量子门流的右端项、解析解、双括号等谱流以及保结构数值积分器
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, List, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg as la
from scipy.special import softmax

from .errors import LandscapeError, SingularResolventError
from .matcore import (
    ComplexMatrix,
    EigenPhases,
    HermitianMatrix,
    RealVector,
    Spectrum,
    UnitaryMatrix,
    as_hermitian,
    as_unitary,
    check_dims,
    commutator,
    dagger,
    eig_unitary,
    eigh,
    expm_skew,
    frobenius,
    phase_factors,
    spectrum_from_values,
    unitarity_residual,
)

logger = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-12
SIMPLEX_NEG_TOL = 1e-14
DENSITY_TOL = 1e-10
CONDITION_LIMIT = 1e12
SLIVER = 1e-9


# ---------------------------------------------------------------- 领域类型


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """单纯形上的布居向量 x = (|c_1|², …, |c_N|²)"""

    x: RealVector

    def __post_init__(self) -> None:
        arr = np.array(self.x, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise LandscapeError("布居向量必须是非空一维数组")
        if not np.all(np.isfinite(arr)):
            raise LandscapeError("布居向量含有 NaN 或 Inf")
        if np.min(arr) < -SIMPLEX_NEG_TOL:
            raise LandscapeError(f"布居为负: min x_i = {np.min(arr):.3e}")
        arr = np.clip(arr, 0.0, None)
        total = float(np.sum(arr))
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise LandscapeError(f"布居之和 {total:.15g} 偏离 1 超过 {SIMPLEX_TOL:.0e}")
        object.__setattr__(self, "x", arr)

    @property
    def dim(self) -> int:
        return int(self.x.size)

    @classmethod
    def uniform(cls, n: int) -> "SimplexPoint":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def vertex(cls, n: int, index: int = 0) -> "SimplexPoint":
        x = np.zeros(n)
        x[index] = 1.0
        return cls(x)

    @classmethod
    def normalized(cls, x: npt.ArrayLike) -> "SimplexPoint":
        """截断负的舍入误差并重新归一化"""
        arr = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
        return cls(arr / np.sum(arr))


@dataclass(frozen=True, eq=False)
class ObservableProblem:
    """可观测量最大化问题 Φ₁ = Tr(Uρ₀U†Θ)"""

    spectrum: Spectrum
    x0: SimplexPoint
    rho0: Optional[HermitianMatrix] = None

    def __post_init__(self) -> None:
        check_dims("初始布居", self.spectrum.dim, self.x0.dim)
        if self.rho0 is None:
            # 在 Θ 的本征基中取实振幅纯态
            psi = self.spectrum.frame @ np.sqrt(self.x0.x)
            object.__setattr__(self, "rho0", np.outer(psi, psi.conj()))
        else:
            check_dims("初始密度矩阵", self.spectrum.dim, self.rho0.shape[0])

    @property
    def dim(self) -> int:
        return self.spectrum.dim

    @property
    def multiplicity_k(self) -> int:
        return self.spectrum.multiplicity

    @property
    def mu(self) -> float:
        return self.spectrum.gap

    @property
    def theta(self) -> HermitianMatrix:
        return self.spectrum.matrix()

    @property
    def is_pure(self) -> bool:
        assert self.rho0 is not None
        return abs(float(np.real(np.trace(self.rho0 @ self.rho0))) - 1.0) <= 1e-10

    @classmethod
    def from_populations(
        cls, values: npt.ArrayLike, x0: Optional[npt.ArrayLike] = None
    ) -> "ObservableProblem":
        """由特征值和初始布居构造 (x0 缺省为均匀布居)"""
        spectrum = spectrum_from_values(values)
        if x0 is None:
            point = SimplexPoint.uniform(spectrum.dim)
        else:
            # 与谱的降序排列保持一致
            order = np.argsort(-np.asarray(values, dtype=np.float64), kind="stable")
            point = SimplexPoint(np.asarray(x0, dtype=np.float64)[order])
        return cls(spectrum, point)

    @classmethod
    def from_operators(cls, theta: npt.ArrayLike, rho0: npt.ArrayLike) -> "ObservableProblem":
        """由算符 Θ 和密度矩阵 ρ₀ 构造"""
        spectrum = eigh(theta)
        rho = as_density(rho0)
        check_dims("初始密度矩阵", spectrum.dim, rho.shape[0])
        pops = np.real(np.diagonal(dagger(spectrum.frame) @ rho @ spectrum.frame))
        return cls(spectrum, SimplexPoint.normalized(pops), rho)


@dataclass(frozen=True, eq=False)
class GateProblem:
    """量子门保真度最大化问题 Φ₂ = Re Tr(A W† U)"""

    target: UnitaryMatrix
    u0: UnitaryMatrix
    weight: HermitianMatrix
    phases: RealVector
    initial: EigenPhases
    theta0: float

    @classmethod
    def create(
        cls,
        target: npt.ArrayLike,
        u0: Optional[npt.ArrayLike] = None,
        weight: Optional[npt.ArrayLike] = None,
    ) -> "GateProblem":
        w = as_unitary(target)
        n = w.shape[0]
        start = np.eye(n, dtype=np.complex128) if u0 is None else as_unitary(u0)
        a = np.eye(n, dtype=np.complex128) if weight is None else as_hermitian(weight)
        check_dims("初始猜测 U₀", n, start.shape[0])
        check_dims("权重 A", n, a.shape[0])
        initial = eig_unitary(dagger(w) @ start)
        # 余弦最小的相位决定收敛界
        theta0 = float(initial.phases[int(np.argmin(np.cos(initial.phases)))])
        return cls(w, start, a, eig_unitary(w).phases, initial, theta0)

    @property
    def dim(self) -> int:
        return int(self.target.shape[0])

    @property
    def uprime0(self) -> UnitaryMatrix:
        return dagger(self.target) @ self.u0

    @property
    def identity_weight(self) -> bool:
        return frobenius(self.weight - np.eye(self.dim)) <= 1e-12

    def recover(self, uprime: UnitaryMatrix) -> UnitaryMatrix:
        """由 U′ = W†U 恢复 U"""
        return self.target @ uprime


Problem = Union[ObservableProblem, GateProblem]


class Representation(str, Enum):
    """可观测量流的表示"""

    REPLICATOR = "replicator"
    UNITARY = "unitary"
    DENSITY = "density"


class Source(str, Enum):
    """轨迹来源: 数值积分或解析解采样"""

    NUMERIC = "numeric"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class IntegratorOptions:
    """积分器选项"""

    representation: Representation = Representation.REPLICATOR
    source: Source = Source.NUMERIC
    max_step: float = 0.01
    step_scale: float = 0.1
    min_step: float = 1e-12
    record_interval: Optional[float] = None
    keep_states: bool = True
    s_max: Optional[float] = None


@dataclass
class FlowSample:
    s: float
    state: Any
    objective: float
    distance: float
    speed: float


@dataclass
class StepStat:
    h: float
    residual: float


@dataclass
class FlowTrajectory:
    """沿梯度流的采样记录"""

    kind: str
    samples: List[FlowSample] = field(default_factory=list)
    step_stats: List[StepStat] = field(default_factory=list)
    status: str = "complete"
    message: str = ""
    final_state: Any = None

    @property
    def s_values(self) -> RealVector:
        return np.array([p.s for p in self.samples])

    @property
    def objectives(self) -> RealVector:
        return np.array([p.objective for p in self.samples])

    @property
    def distances(self) -> RealVector:
        return np.array([p.distance for p in self.samples])

    @property
    def speeds(self) -> RealVector:
        return np.array([p.speed for p in self.samples])

    @property
    def states(self) -> List[Any]:
        return [p.state for p in self.samples]

    def max_residual(self) -> float:
        if not self.step_stats:
            return 0.0
        return max(st.residual for st in self.step_stats)


# ---------------------------------------------------------------- 目标函数与右端项


def as_density(rho: npt.ArrayLike) -> HermitianMatrix:
    """校验密度矩阵 (厄米、迹为 1、半正定)"""
    r = as_hermitian(rho)
    trace = float(np.real(np.trace(r)))
    if abs(trace - 1.0) > DENSITY_TOL:
        raise LandscapeError(f"密度矩阵的迹为 {trace:.12g}, 不是 1")
    lowest = float(np.linalg.eigvalsh(r)[0])
    if lowest < -DENSITY_TOL:
        raise LandscapeError(f"密度矩阵不是半正定的: 最小本征值 {lowest:.3e}")
    return r


def phi1(x: SimplexPoint, spectrum: Spectrum) -> float:
    """纯态可观测量目标 Σ λ_i x_i"""
    check_dims("布居", spectrum.dim, x.dim)
    return float(np.dot(spectrum.values, x.x))


def phi1_unitary(u: UnitaryMatrix, problem: ObservableProblem) -> float:
    """Tr(Uρ₀U†Θ)"""
    rho = u @ problem.rho0 @ dagger(u)
    return float(np.real(np.trace(rho @ problem.theta)))


def phi2(u: UnitaryMatrix, problem: GateProblem) -> float:
    """门保真度 Re Tr(A W† U)"""
    check_dims("U", problem.dim, u.shape[0])
    return float(np.real(np.trace(problem.weight @ dagger(problem.target) @ u)))


def rhs_observable_unitary(
    u: UnitaryMatrix, rho0: HermitianMatrix, theta: HermitianMatrix
) -> ComplexMatrix:
    """(dU/ds)₁ = −U[ρ₀, U†ΘU]"""
    check_dims("ρ₀", u.shape[0], rho0.shape[0])
    check_dims("Θ", u.shape[0], theta.shape[0])
    return -u @ commutator(rho0, dagger(u) @ theta @ u)


def rhs_gate(uprime: UnitaryMatrix, a: HermitianMatrix) -> ComplexMatrix:
    """(dU′/ds)₂ = A − U′AU′"""
    check_dims("A", uprime.shape[0], a.shape[0])
    return a - uprime @ a @ uprime


def replicator_rhs(x: RealVector, values: RealVector) -> RealVector:
    """复制子方程 ẋ_i = 2x_i(λ_i − Σλ_j x_j)"""
    return 2.0 * x * (values - np.dot(values, x))


def double_bracket_rhs(rho: npt.ArrayLike, theta: npt.ArrayLike) -> HermitianMatrix:
    """双括号流 dρ/ds = [ρ, [ρ, Θ]], 沿此方向 Tr(ρΘ) 不减"""
    r = as_density(rho)
    t = as_hermitian(theta)
    check_dims("Θ", r.shape[0], t.shape[0])
    return commutator(r, commutator(r, t))


# ---------------------------------------------------------------- 解析解


def limit_point(problem: ObservableProblem) -> SimplexPoint:
    """流的极限点: 初始布居投影到最大特征值子空间后归一化"""
    k = problem.multiplicity_k
    x = np.zeros(problem.dim)
    top = problem.x0.x[:k]
    mass = float(np.sum(top))
    if mass > 0.0:
        x[:k] = top / mass
    else:
        # 初值在盆地边界上, 取名义最优点
        x[:k] = 1.0 / k
    return SimplexPoint(x)


def log_weights(s: npt.ArrayLike, problem: ObservableProblem) -> np.ndarray:
    s_arr = np.asarray(s, dtype=np.float64)
    if np.any(s_arr < 0.0):
        raise LandscapeError("算法时间 s 必须 ≥ 0")
    with np.errstate(divide="ignore"):
        log_x0 = np.log(problem.x0.x)
    return log_x0 + 2.0 * np.multiply.outer(s_arr, problem.spectrum.values)


def analytic_x(s: float, problem: ObservableProblem) -> SimplexPoint:
    """x_i(s) = x_i(0)e^{2sλ_i} / Σ_j x_j(0)e^{2sλ_j} (平移指数形式, 不溢出)"""
    return SimplexPoint.normalized(softmax(log_weights(s, problem)))


def analytic_gate(s: float, problem: GateProblem) -> UnitaryMatrix:
    """U′(s) = (sinh s + cosh s·U′₀)(cosh s + sinh s·U′₀)⁻¹, 仅限 A = I"""
    _require_identity_weight(problem)
    if s < 0.0:
        raise LandscapeError("算法时间 s 必须 ≥ 0")
    n = problem.dim
    t = np.tanh(s)
    u0 = problem.uprime0
    resolvent = np.eye(n) + t * u0
    condition = float(np.linalg.cond(resolvent))
    if condition > CONDITION_LIMIT:
        raise SingularResolventError(s, condition)
    # 分子分母可交换, 除以 cosh s 避免溢出
    return la.solve(resolvent, t * np.eye(n) + u0)


def gate_mode_values(s: npt.ArrayLike, phases: RealVector) -> np.ndarray:
    """逐模 Möbius 形式 (tanh s + z)/(1 + z tanh s), 用 q = e^{−2s} 计算"""
    z = phase_factors(phases)
    q = np.exp(-2.0 * np.asarray(s, dtype=np.float64))[..., None]
    return ((1.0 + z) - q * (1.0 - z)) / ((1.0 + z) + q * (1.0 - z))


def analytic_gate_modes(s: float, problem: GateProblem) -> UnitaryMatrix:
    """在 U′₀ 的本征基中逐模计算解析门流"""
    _require_identity_weight(problem)
    if s < 0.0:
        raise LandscapeError("算法时间 s 必须 ≥ 0")
    v = problem.initial.frame
    u = gate_mode_values(s, problem.initial.phases)
    return dagger(v) @ (u[:, None] * v)


def _require_identity_weight(problem: GateProblem) -> None:
    if not problem.identity_weight:
        raise LandscapeError("解析门流只对 A = I 成立")


def has_analytic(problem: Problem, options: IntegratorOptions) -> bool:
    """该问题在此表示下是否有闭式解"""
    if isinstance(problem, GateProblem):
        return problem.identity_weight
    return problem.is_pure and options.representation is Representation.REPLICATOR


def analytic_state(s: float, problem: Problem) -> Any:
    if isinstance(problem, GateProblem):
        return analytic_gate_modes(s, problem)
    return analytic_x(s, problem)


# ---------------------------------------------------------------- 数值积分

_RK4_A: Tuple[Tuple[float, ...], ...] = ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0))
_RK4_B = (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)


def _dexpinv(omega: ComplexMatrix, a: ComplexMatrix) -> ComplexMatrix:
    # 截断到四阶方法所需的项
    c1 = commutator(omega, a)
    return a - 0.5 * c1 + commutator(omega, c1) / 12.0


def _skew(omega: npt.ArrayLike) -> ComplexMatrix:
    m = np.asarray(omega, dtype=np.complex128)
    return 0.5 * (m - dagger(m))


def _rkmk4_increment(
    y: Any,
    h: float,
    generator: Callable[[Any], ComplexMatrix],
    act: Callable[[UnitaryMatrix, Any], Any],
) -> ComplexMatrix:
    # 各级生成元投影回反厄米部分, 消除接近收敛时的舍入残差
    ks: List[ComplexMatrix] = []
    for i in range(4):
        if i == 0:
            ks.append(h * generator(y))
            continue
        omega = _skew(sum(a * k for a, k in zip(_RK4_A[i], ks)))
        f = generator(act(expm_skew(omega), y))
        ks.append(h * _dexpinv(omega, f))
    return _skew(sum(b * k for b, k in zip(_RK4_B, ks)))


def rkmk4_step(
    u: UnitaryMatrix, h: float, generator: Callable[[UnitaryMatrix], ComplexMatrix]
) -> UnitaryMatrix:
    """四级 Runge–Kutta–Munthe-Kaas 测地步, du/ds = F(u)·u, F 反厄米"""
    omega = _rkmk4_increment(u, h, generator, lambda q, y: q @ y)
    return expm_skew(omega) @ u


def isospectral_step(
    rho: HermitianMatrix, h: float, generator: Callable[[HermitianMatrix], ComplexMatrix]
) -> HermitianMatrix:
    """dρ/ds = [B(ρ), ρ] 的 RKMK4 共轭步 ρ → QρQ†, 谱严格不变"""
    omega = _rkmk4_increment(rho, h, generator, lambda q, y: q @ y @ dagger(q))
    q = expm_skew(omega)
    out = q @ rho @ dagger(q)
    return 0.5 * (out + dagger(out))


def rk4_step(x: RealVector, h: float, rhs: Callable[[RealVector], RealVector]) -> RealVector:
    """经典四级 Runge–Kutta 步"""
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


@dataclass
class _FlowModel:
    """一条流在某种表示下的全部回调"""

    kind: str
    initial: Any
    advance: Callable[[Any, float], Tuple[Any, float]]
    speed: Callable[[Any], float]
    objective: Callable[[Any], float]
    distance: Callable[[Any], float]


def _observable_replicator_model(problem: ObservableProblem) -> _FlowModel:
    from . import complexity

    values = problem.spectrum.values

    def rhs(x: RealVector) -> RealVector:
        return replicator_rhs(x, values)

    def advance(point: SimplexPoint, h: float) -> Tuple[SimplexPoint, float]:
        x = rk4_step(point.x, h, rhs)
        residual = abs(float(np.sum(x)) - 1.0)
        return SimplexPoint.normalized(x), residual

    return _FlowModel(
        kind="observable_replicator",
        initial=problem.x0,
        advance=advance,
        speed=lambda p: float(np.linalg.norm(rhs(p.x))),
        objective=lambda p: phi1(p, problem.spectrum),
        distance=lambda p: complexity.distance_observable(p, problem),
    )


@dataclass(frozen=True, eq=False)
class DensityPoint:
    """密度表示下的状态 ρ(s)"""

    rho: HermitianMatrix


def populations(state: Union[UnitaryMatrix, DensityPoint], problem: ObservableProblem) -> SimplexPoint:
    """ρ(s) (酉表示下为 Uρ₀U†) 在 Θ 本征基中的布居"""
    v = problem.spectrum.frame
    if isinstance(state, DensityPoint):
        rho = state.rho
    else:
        rho = state @ problem.rho0 @ dagger(state)
    return SimplexPoint.normalized(np.real(np.diagonal(dagger(v) @ rho @ v)))


def _observable_unitary_model(problem: ObservableProblem) -> _FlowModel:
    from . import complexity

    theta = problem.theta
    rho0 = problem.rho0
    assert rho0 is not None

    def generator(u: UnitaryMatrix) -> ComplexMatrix:
        return rhs_observable_unitary(u, rho0, theta) @ dagger(u)

    def advance(u: UnitaryMatrix, h: float) -> Tuple[UnitaryMatrix, float]:
        nxt = rkmk4_step(u, h, generator)
        return nxt, unitarity_residual(nxt)

    return _FlowModel(
        kind="observable_unitary",
        initial=np.eye(problem.dim, dtype=np.complex128),
        advance=advance,
        speed=lambda u: frobenius(generator(u)),
        objective=lambda u: phi1_unitary(u, problem),
        distance=lambda u: complexity.distance_observable(populations(u, problem), problem),
    )


def _observable_density_model(problem: ObservableProblem) -> _FlowModel:
    from . import complexity

    theta = problem.theta
    assert problem.rho0 is not None

    def generator(rho: HermitianMatrix) -> ComplexMatrix:
        # [B, ρ] = [ρ, [ρ, Θ]] 取 B = [Θ, ρ]
        return commutator(theta, rho)

    def advance(point: DensityPoint, h: float) -> Tuple[DensityPoint, float]:
        nxt = isospectral_step(point.rho, h, generator)
        return DensityPoint(nxt), abs(float(np.real(np.trace(nxt))) - 1.0)

    return _FlowModel(
        kind="observable_density",
        initial=DensityPoint(problem.rho0),
        advance=advance,
        speed=lambda p: frobenius(double_bracket_rhs(p.rho, theta)),
        objective=lambda p: float(np.real(np.trace(p.rho @ theta))),
        distance=lambda p: complexity.distance_observable(populations(p, problem), problem),
    )


def _gate_model(problem: GateProblem) -> _FlowModel:
    from . import complexity

    a = problem.weight

    def generator(uprime: UnitaryMatrix) -> ComplexMatrix:
        return rhs_gate(uprime, a) @ dagger(uprime)

    def advance(uprime: UnitaryMatrix, h: float) -> Tuple[UnitaryMatrix, float]:
        nxt = rkmk4_step(uprime, h, generator)
        return nxt, unitarity_residual(nxt)

    return _FlowModel(
        kind="gate",
        initial=problem.uprime0,
        advance=advance,
        speed=lambda u: frobenius(generator(u)),
        objective=lambda u: float(np.real(np.trace(a @ u))),
        distance=complexity.distance_gate,
    )


def _flow_model(problem: Problem, options: IntegratorOptions) -> _FlowModel:
    if isinstance(problem, GateProblem):
        return _gate_model(problem)
    if options.representation is Representation.UNITARY:
        return _observable_unitary_model(problem)
    if options.representation is Representation.DENSITY or not problem.is_pure:
        return _observable_density_model(problem)
    return _observable_replicator_model(problem)


def flow_stepper(
    problem: Problem, options: Optional[IntegratorOptions] = None
) -> Callable[[Any, float], Any]:
    """与 integrate 相同积分器的单步推进 (状态, h) → 新状态"""
    model = _flow_model(problem, options or IntegratorOptions())

    def step(state: Any, h: float) -> Any:
        if h <= 0.0:
            return state
        return model.advance(state, h)[0]

    return step


Until = Callable[[float, Any], bool]


def integrate(
    problem: Problem,
    s_max: float,
    options: Optional[IntegratorOptions] = None,
    until: Optional[Until] = None,
) -> FlowTrajectory:
    """沿梯度流积分到 s_max (或 until 首次为真)"""
    options = options or IntegratorOptions()
    if not s_max > 0.0:
        raise LandscapeError(f"s_max 必须 > 0, 实际 {s_max}")
    model = _flow_model(problem, options)
    if options.source is Source.ANALYTIC:
        if not has_analytic(problem, options):
            raise LandscapeError("该问题在此表示下没有解析解, 请使用数值积分")
        return _sample_analytic(problem, model, s_max, options, until)
    return _march(model, s_max, options, until)


def _record(
    traj: FlowTrajectory, model: _FlowModel, s: float, state: Any, speed: float, keep: bool
) -> None:
    traj.samples.append(
        FlowSample(
            s=s,
            state=state if keep else None,
            objective=model.objective(state),
            distance=model.distance(state),
            speed=speed,
        )
    )


def _next_grid_point(s: float, interval: Optional[float]) -> float:
    if interval is None:
        return np.inf
    return (np.floor(s / interval + 1e-9) + 1.0) * interval


def _march(
    model: _FlowModel, s_max: float, options: IntegratorOptions, until: Optional[Until]
) -> FlowTrajectory:
    traj = FlowTrajectory(kind=model.kind)
    state = model.initial
    s = 0.0
    speed = model.speed(state)
    _record(traj, model, s, state, speed, options.keep_states)
    if until is not None and until(s, state):
        traj.status = "halted"
        traj.final_state = state
        return traj

    while s_max - s > 1e-12:
        h = options.max_step
        if speed > 0.0:
            h = min(h, options.step_scale / speed)
        grid = _next_grid_point(s, options.record_interval)
        limit = min(s_max - s, grid - s)
        h = min(h, limit)
        if limit - h <= SLIVER:
            h = limit
        if h < options.min_step:
            traj.status = "step_underflow"
            traj.message = f"s = {s:.6g} 处步长 {h:.3e} 低于下限 {options.min_step:.1e} (刚性实例)"
            logger.warning(traj.message)
            break
        state, residual = model.advance(state, h)
        s = s + h
        if s_max - s <= 1e-12:
            s = s_max
        speed = model.speed(state)
        if not np.isfinite(speed):
            traj.status = "non_finite"
            traj.message = f"s = {s:.6g} 处出现非有限值"
            logger.warning(traj.message)
            break
        traj.step_stats.append(StepStat(h, residual))
        halted = until is not None and until(s, state)
        on_grid = options.record_interval is None or abs(s - grid) <= 1e-12 or s == s_max
        if on_grid or halted:
            _record(traj, model, s, state, speed, options.keep_states)
        if halted:
            traj.status = "halted"
            break

    traj.final_state = state
    if not options.keep_states and traj.samples:
        traj.samples[-1].state = state
    return traj


def _sample_analytic(
    problem: Problem,
    model: _FlowModel,
    s_max: float,
    options: IntegratorOptions,
    until: Optional[Until],
) -> FlowTrajectory:
    traj = FlowTrajectory(kind=model.kind + "_analytic")
    h = options.record_interval or options.max_step
    count = int(np.ceil(s_max / h - 1e-9))
    grid = np.minimum(np.arange(count + 1) * h, s_max)
    state = None
    for s in grid:
        state = analytic_state(float(s), problem)
        _record(traj, model, float(s), state, model.speed(state), options.keep_states)
        if until is not None and until(float(s), state):
            traj.status = "halted"
            break
    traj.final_state = state
    if not options.keep_states and traj.samples:
        traj.samples[-1].state = state
    return traj


def analytic_trajectory(
    problem: Problem, s_max: float, options: Optional[IntegratorOptions] = None
) -> FlowTrajectory:
    """按闭式解采样的轨迹"""
    options = options or IntegratorOptions()
    return integrate(problem, s_max, _with_source(options, Source.ANALYTIC))


def _with_source(options: IntegratorOptions, source: Source) -> IntegratorOptions:
    return replace(options, source=source)


def density_path(trajectory: FlowTrajectory, problem: ObservableProblem) -> List[HermitianMatrix]:
    """由酉表示或密度表示的轨迹恢复 ρ(s) = Uρ₀U†"""
    conjugate = trajectory.kind.startswith("observable_unitary")
    if not conjugate and not trajectory.kind.startswith("observable_density"):
        raise LandscapeError("只有酉表示或密度表示的可观测量轨迹才能恢复 ρ(s)")
    out = []
    for state in trajectory.states:
        if state is None:
            raise LandscapeError("轨迹未保存状态 (keep_states=False)")
        out.append(state @ problem.rho0 @ dagger(state) if conjugate else state.rho)
    return out


def objective_optimum(problem: Problem) -> float:
    """Φ(∞): 纯态取极限点的值, 混合态取降序本征值配对和, 门取 Σ|a_i|"""
    if isinstance(problem, GateProblem):
        return float(np.sum(np.abs(np.linalg.eigvalsh(problem.weight))))
    if not problem.is_pure:
        weights = np.sort(np.linalg.eigvalsh(problem.rho0))[::-1]
        return float(np.dot(weights, problem.spectrum.values))
    return phi1(limit_point(problem), problem.spectrum)


def objective_gap(trajectory: FlowTrajectory, problem: Problem) -> RealVector:
    """Φ(∞) − Φ(s)"""
    return objective_optimum(problem) - trajectory.objectives
