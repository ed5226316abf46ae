#!/usr/bin/env python3
"""
收敛复杂度模块
实现停机判据、收敛时间与路径长度的测量、全部闭式上界以及维度标度研究
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from .errors import LandscapeError, SamplingDensityError
from .flows import (
    FlowTrajectory,
    GateProblem,
    IntegratorOptions,
    ObservableProblem,
    Problem,
    SimplexPoint,
    analytic_state,
    flow_stepper,
    gate_mode_values,
    has_analytic,
    integrate,
    limit_point,
    log_weights,
    populations,
)
from .matcore import (
    RealVector,
    Spectrum,
    UnitaryMatrix,
    dagger,
    frobenius,
    haar_unitary,
    instance_seed,
    make_rng,
    spectrum_from_values,
)

logger = logging.getLogger(__name__)

BISECTION_TOL = 1e-6
PATH_DENSITY = 100.0
PATH_CROSSCHECK_TOL = 1e-6
UNITARY_FAILURE_TOL = 1e-9
SIMPLEX_FAILURE_TOL = 1e-10
MAX_RESAMPLE = 1000


# ---------------------------------------------------------------- 类型


@dataclass(frozen=True)
class HaltSpec:
    """停机判据: 进入 ε_p 球且位于吸引域内"""

    epsilon_p: float
    require_region: bool = True

    def __post_init__(self) -> None:
        if not self.epsilon_p > 0.0:
            raise LandscapeError(f"epsilon_p 必须 > 0, 实际 {self.epsilon_p}")


@dataclass(frozen=True)
class GateBoundReport:
    theta0: float
    a: float
    delta: float
    x_c_minus: float
    t_bound: float
    t_tight: float
    t_approx: float
    converges: bool = True


@dataclass
class ConvergenceReport:
    t_measured: float
    bound_tc_eps: float
    bound_tc_region: float
    bound_tc_total: float
    converged: bool
    distance_curve: Optional[FlowTrajectory]
    halt: HaltSpec
    s_max: float
    gate_bound: Optional[GateBoundReport] = None
    message: str = ""

    @property
    def bound_violated(self) -> bool:
        return self.converged and self.t_measured > self.bound_tc_total + 1e-9


# ---------------------------------------------------------------- 距离与吸引域


def distance_observable(x: SimplexPoint, problem: ObservableProblem) -> float:
    """‖x − x(∞)‖₂"""
    return float(np.linalg.norm(x.x - limit_point(problem).x))


def distance_gate(uprime: UnitaryMatrix) -> float:
    """‖U′ − I‖_F"""
    return frobenius(uprime - np.eye(uprime.shape[0]))


def _as_populations(state: Any, problem: ObservableProblem) -> SimplexPoint:
    if isinstance(state, SimplexPoint):
        return state
    return populations(state, problem)


def in_attracting_region(state: Any, problem: Problem) -> bool:
    """可观测量: Σλ_j x_j > λ_{k+1}; 门 (A = I): 整个 U(N)"""
    if isinstance(problem, GateProblem):
        return True
    k = problem.multiplicity_k
    if k >= problem.dim:
        return True
    x = _as_populations(state, problem)
    values = problem.spectrum.values
    return float(np.dot(values, x.x)) > float(values[k])


def state_distance(state: Any, problem: Problem) -> float:
    if isinstance(problem, GateProblem):
        return distance_gate(state)
    return distance_observable(_as_populations(state, problem), problem)


def is_halted(state: Any, problem: Problem, halt: HaltSpec) -> bool:
    if state_distance(state, problem) > halt.epsilon_p:
        return False
    return not halt.require_region or in_attracting_region(state, problem)


def region_entry_time(trajectory: FlowTrajectory, problem: ObservableProblem) -> float:
    """轨迹首次进入吸引域的采样时刻 (目标值即 Σλx)"""
    k = problem.multiplicity_k
    if k >= problem.dim:
        return 0.0
    threshold = float(problem.spectrum.values[k])
    inside = trajectory.objectives > threshold
    if not np.any(inside):
        return math.inf
    return float(trajectory.s_values[int(np.argmax(inside))])


# ---------------------------------------------------------------- 可观测量上界


def bound_tc_eps_observable(spectrum: Spectrum, k: int, x0: SimplexPoint, eps: float) -> float:
    """t_c(ε) ≤ (1/2μ) ln(2k/(ε² c)), c 为最优块中最小初始布居 (均匀时 c = 1/N)"""
    if eps <= 0.0:
        raise LandscapeError(f"ε 必须 > 0, 实际 {eps}")
    mu = _gap(spectrum, k)
    if mu <= 0.0:
        return math.inf
    c = float(np.min(x0.x[:k]))
    if c <= 0.0:
        return math.inf
    arg = 2.0 * k / (eps**2 * c)
    if arg <= 1.0:
        return 0.0
    return math.log(arg) / (2.0 * mu)


def _gap(spectrum: Spectrum, k: int) -> float:
    if k >= spectrum.dim:
        return 0.0
    return float(spectrum.values[0] - spectrum.values[k])


def _region_log_argument(spectrum: Spectrum, k: int, x0: SimplexPoint) -> float:
    n = spectrum.dim
    values = spectrum.values
    lam1 = float(values[0])
    lam_next = float(values[k])
    c_next = float(x0.x[k])
    numerator = (n - k - 2) * lam_next * c_next
    denominator = float(np.sum(lam1 * x0.x[:k] - lam_next * c_next))
    if denominator <= 0.0:
        logger.warning("吸引域上界分母 %.3e ≤ 0, 该初值下上界无定义", denominator)
        return math.inf
    return numerator / denominator


def bound_tc_region_observable(spectrum: Spectrum, k: int, x0: SimplexPoint) -> float:
    """t_c(R) 上界; 对数自变量 ≤ 1 或 N ≤ k+2 时截断为 0"""
    n = spectrum.dim
    mu = _gap(spectrum, k)
    if mu <= 0.0:
        return math.inf
    if n - k - 2 <= 0 or spectrum.values[k] <= 0.0:
        return 0.0
    arg = _region_log_argument(spectrum, k, x0)
    if math.isinf(arg):
        return math.inf
    if arg <= 1.0:
        return 0.0
    return math.log(arg) / mu


def bound_tc_total_observable(spectrum: Spectrum, k: int, x0: SimplexPoint, eps: float) -> float:
    """加和形式 t_c(ε) + t_c(R), 与 max 形式并列报告

    均匀初值时即 (1/2μ)[ln(2Nk/ε²) + 2 ln(区域自变量)]
    """
    mu = _gap(spectrum, k)
    if mu <= 0.0:
        return math.inf
    return bound_tc_eps_observable(spectrum, k, x0, eps) + bound_tc_region_observable(
        spectrum, k, x0
    )


def distance_bound_observable(s: float, spectrum: Spectrum, k: int, x0: SimplexPoint) -> float:
    """先验距离包络 ‖x(s) − x(∞)‖² ≤ 2 − (2/k)·m/(m + e^{−2μs}), m 为最优块初始布居"""
    mu = _gap(spectrum, k)
    m = float(np.sum(x0.x[:k]))
    if m <= 0.0:
        return math.sqrt(2.0)
    ratio = m / (m + math.exp(-2.0 * mu * s))
    return math.sqrt(max(0.0, 2.0 - 2.0 * ratio / k))


# ---------------------------------------------------------------- 门上界


def bound_tc_gate(theta0: float, eps: float, n: int) -> GateBoundReport:
    """由最坏本征相位 θ₀ 的二次方程求 x_{c,max,−}, 并给出收敛时间上界"""
    if eps <= 0.0:
        raise LandscapeError(f"ε 必须 > 0, 实际 {eps}")
    if n < 1:
        raise LandscapeError(f"维度 N 必须 ≥ 1, 实际 {n}")
    c = math.cos(theta0)
    sin_abs = abs(math.sin(theta0))
    a = sin_abs / (1.0 - c) if c < 1.0 else math.inf

    if abs(abs(theta0) - math.pi) <= 1e-12:
        return GateBoundReport(theta0, 0.0, 0.0, 1.0, math.inf, math.inf, math.inf, False)

    lead = 2.0 * n * (1.0 - c) - eps
    if lead <= 0.0:
        # 初始点已在 ε 球内
        return GateBoundReport(theta0, a, 1.0, 0.0, 0.0, 0.0, 0.0)
    p = 2.0 * n * (1.0 - c) + eps * c
    q = math.sqrt(eps * (4.0 * n - eps)) * sin_abs
    x = lead / (p + q)
    delta = 1.0 - x
    if x >= 1.0:
        return GateBoundReport(theta0, a, delta, 1.0, math.inf, math.inf, math.inf, False)
    t_bound = math.log((1.0 + x) / (1.0 - x))
    t_tight = math.atanh(x)
    approx_arg = 4.0 * n / (a * a * eps)
    t_approx = 0.5 * math.log(approx_arg) if approx_arg > 1.0 else 0.0
    return GateBoundReport(theta0, a, delta, x, t_bound, t_tight, t_approx)


def gate_distance_modes(phases: RealVector, s: float) -> float:
    """逐模闭式距离 √Σ 2(1−cosθ_k)(1−x)²/(1+2x cosθ_k+x²), x = tanh s"""
    u = gate_mode_values(s, np.asarray(phases, dtype=np.float64))
    return float(np.sqrt(np.sum(np.abs(u - 1.0) ** 2)))


def distance_bound_gate(s: float, theta0: float, n: int) -> float:
    """以 θ₀ 模替代全部模的距离包络"""
    return math.sqrt(n) * gate_distance_modes(np.array([theta0]), s)


# ---------------------------------------------------------------- 收敛时间测量


def problem_bounds(
    problem: Problem, halt: HaltSpec
) -> Tuple[float, float, float, Optional[GateBoundReport]]:
    """(t_c(ε), t_c(R), t_c(H), 门上界报告)"""
    if isinstance(problem, GateProblem):
        if not problem.identity_weight:
            return math.nan, 0.0, math.nan, None
        # 门的二次方程针对距离平方
        report = bound_tc_gate(problem.theta0, halt.epsilon_p**2, problem.dim)
        return report.t_bound, 0.0, report.t_bound, report
    k = problem.multiplicity_k
    eps_bound = bound_tc_eps_observable(problem.spectrum, k, problem.x0, halt.epsilon_p)
    region_bound = (
        bound_tc_region_observable(problem.spectrum, k, problem.x0) if halt.require_region else 0.0
    )
    return eps_bound, region_bound, max(eps_bound, region_bound), None


def default_s_max(problem: Problem, total_bound: float) -> float:
    if math.isfinite(total_bound):
        return 1.5 * total_bound + 5.0
    # 病态门实例: 限制积分长度, 数值噪声不足以离开 −1 不动点
    return 10.0 if isinstance(problem, GateProblem) else 20.0


def _bisect(predicate: Callable[[float], bool], lo: float, hi: float) -> float:
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _refine_halt(
    trajectory: FlowTrajectory,
    problem: Problem,
    halt: HaltSpec,
    options: IntegratorOptions,
    last_outside: Tuple[float, Any],
) -> float:
    hi = trajectory.samples[-1]
    if len(trajectory.samples) == 1:
        return hi.s
    if has_analytic(problem, options):
        lo = trajectory.samples[-2]
        return _bisect(lambda s: is_halted(analytic_state(s, problem), problem, halt), lo.s, hi.s)
    # 无闭式解: 从最后一个未停机的积分点出发, 单步重积分后二分
    s_lo, state_lo = last_outside
    step = flow_stepper(problem, options)
    return _bisect(lambda s: is_halted(step(state_lo, s - s_lo), problem, halt), s_lo, hi.s)


def measure_tc(
    problem: Problem, halt: HaltSpec, options: Optional[IntegratorOptions] = None
) -> ConvergenceReport:
    """沿流测量首次满足停机判据的时间, 并计算对应上界"""
    options = options or IntegratorOptions()
    eps_bound, region_bound, total, gate_report = problem_bounds(problem, halt)
    s_max = options.s_max if options.s_max is not None else default_s_max(problem, total)

    last_outside: List[Tuple[float, Any]] = []

    def until(s: float, state: Any) -> bool:
        if is_halted(state, problem, halt):
            return True
        last_outside[:] = [(s, state)]
        return False

    trajectory = integrate(problem, s_max, options, until=until)
    converged = trajectory.status == "halted"
    if converged:
        start = last_outside[0] if last_outside else (0.0, None)
        t_measured = _refine_halt(trajectory, problem, halt, options, start)
        message = ""
    else:
        t_measured = math.inf
        message = f"s_max = {s_max:.6g} 内未满足停机判据 ({trajectory.status})"
        logger.info(message)
    report = ConvergenceReport(
        t_measured=t_measured,
        bound_tc_eps=eps_bound,
        bound_tc_region=region_bound,
        bound_tc_total=total,
        converged=converged,
        distance_curve=trajectory,
        halt=halt,
        s_max=s_max,
        gate_bound=gate_report,
        message=message,
    )
    if report.bound_violated:
        logger.warning("测得 t_c = %.6g 超过上界 %.6g", t_measured, total)
    return report


# ---------------------------------------------------------------- 路径长度


def _check_density(trajectory: FlowTrajectory) -> RealVector:
    s = trajectory.s_values
    if s.size < 2:
        return s
    max_gap = float(np.max(np.diff(s)))
    if max_gap > 1.0 / PATH_DENSITY + 1e-12:
        raise SamplingDensityError(PATH_DENSITY, 1.0 / max_gap)
    return s


def path_length_closed_form(trajectory: FlowTrajectory) -> float:
    """A = I 门流的闭式被积函数 √(2(N − Re Tr U′²)) 的求积"""
    s = _check_density(trajectory)
    if s.size < 2:
        return 0.0
    speeds = []
    for u in trajectory.states:
        if u is None:
            raise LandscapeError("闭式路径长度需要保存的状态 (keep_states=True)")
        n = u.shape[0]
        speeds.append(math.sqrt(max(0.0, 2.0 * (n - float(np.real(np.trace(u @ u)))))))
    return float(trapezoid(np.array(speeds), s))


def path_length(trajectory: FlowTrajectory, problem: Optional[Problem] = None) -> float:
    """速度沿轨迹的复合梯形求积 L = ∫‖U̇‖_F ds"""
    s = _check_density(trajectory)
    if s.size < 2:
        return 0.0
    length = float(trapezoid(trajectory.speeds, s))
    if (
        isinstance(problem, GateProblem)
        and problem.identity_weight
        and all(st is not None for st in trajectory.states)
    ):
        closed = path_length_closed_form(trajectory)
        if abs(closed - length) > PATH_CROSSCHECK_TOL * max(1.0, length):
            logger.warning("路径长度与闭式结果不一致: %.12g vs %.12g", length, closed)
    return length


def bound_path_length(theta0: float, n: int, x_c: float) -> float:
    """L < π√(2N)|sin θ₀|/√(1 − x_c)"""
    if x_c < 0.0:
        raise LandscapeError(f"x_c 必须 ≥ 0, 实际 {x_c}")
    sin_abs = abs(math.sin(theta0))
    if sin_abs == 0.0:
        return 0.0
    if x_c >= 1.0:
        return math.inf
    return math.pi * math.sqrt(2.0 * n) * sin_abs / math.sqrt(1.0 - x_c)


# ---------------------------------------------------------------- 衰减率


def fit_decay_rate(problem: ObservableProblem, window: Optional[Tuple[float, float]] = None) -> float:
    """拟合 ln(1 − Σ_{i≤k} x_i(s)) 的指数衰减率 (对数空间计算, 不下溢)"""
    mu = problem.mu
    if mu <= 0.0:
        raise LandscapeError("谱完全简并, 没有衰减率")
    k = problem.multiplicity_k
    lo, hi = window if window is not None else (100.0 / mu, 200.0 / mu)
    s = np.linspace(lo, hi, 201)
    logw = log_weights(s, problem)
    tail = logsumexp(logw[:, k:], axis=1)
    if not np.all(np.isfinite(tail)):
        raise LandscapeError("初始布居在次优子空间上为零, 无法拟合衰减率")
    log_rest = tail - logsumexp(logw, axis=1)
    return float(-stats.linregress(s, log_rest).slope)


# ---------------------------------------------------------------- 标度研究


class StudyKind(str, Enum):
    OBSERVABLE = "observable"
    GATE = "gate"


@dataclass(frozen=True)
class StudyConfig:
    """标度研究的输入"""

    kind: StudyKind
    dims: Tuple[int, ...]
    instances_per_dim: int
    seed: int
    halt: HaltSpec
    options: IntegratorOptions = field(default_factory=IntegratorOptions)
    fixed_mu: bool = True
    min_gap: float = 0.05
    phase_margin: float = 0.1
    measure_path: bool = False
    threads: int = 1

    def __post_init__(self) -> None:
        if not self.dims:
            raise LandscapeError("dims 不能为空")
        if min(self.dims) < 2:
            raise LandscapeError("标度研究要求 N ≥ 2")
        if self.instances_per_dim < 1:
            raise LandscapeError("instances_per_dim 必须 ≥ 1")


@dataclass
class InstanceRecord:
    kind: str
    n: int
    seed: int
    t_measured: float
    bound_eps: float
    bound_region: float
    bound_total: float
    converged: bool
    path_length: float
    path_bound: float
    invariant_max_residual: float
    resampled: int = 0
    theta0: float = math.nan
    invariant_failure: bool = False
    bound_violation: bool = False


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass
class ScalingStudy:
    config: StudyConfig
    records: List[InstanceRecord] = field(default_factory=list)
    fit: Optional[LinearFit] = None
    path_fit: Optional[LinearFit] = None

    @property
    def resampled(self) -> int:
        return sum(r.resampled for r in self.records)

    @property
    def violations(self) -> int:
        return sum(r.bound_violation for r in self.records)

    @property
    def failures(self) -> int:
        return sum(r.invariant_failure for r in self.records)


def fixed_gap_spectrum(n: int, rng: np.random.Generator) -> Spectrum:
    """λ₁ = 1, λ₂ = 0, 其余在 [−1, 0] 上均匀, 因此 μ = 1"""
    tail = rng.uniform(-1.0, 0.0, size=max(0, n - 2))
    return spectrum_from_values(np.concatenate([[1.0, 0.0], tail])[:n])


def draw_observable(n: int, seed: int, fixed_mu: bool, min_gap: float) -> Tuple[ObservableProblem, int]:
    """随机非简并可观测量实例 (均匀初始布居), 返回 (问题, 重采样次数)"""
    rng = make_rng(seed)
    if fixed_mu:
        spectrum = fixed_gap_spectrum(n, rng)
        return ObservableProblem(spectrum, SimplexPoint.uniform(n)), 0
    for attempt in range(MAX_RESAMPLE):
        spectrum = spectrum_from_values(rng.uniform(0.0, 1.0, size=n))
        if spectrum.gap >= min_gap:
            if attempt:
                logger.warning("N = %d, 种子 %d: 谱隙过小, 重采样 %d 次", n, seed, attempt)
            return ObservableProblem(spectrum, SimplexPoint.uniform(n)), attempt
    raise LandscapeError(f"N = {n} 种子 {seed}: {MAX_RESAMPLE} 次内未采到谱隙 ≥ {min_gap} 的实例")


def draw_gate(n: int, seed: int, phase_margin: float) -> Tuple[GateProblem, int]:
    """Haar 目标门, U₀ = I, θ₀ 与 π 至少相距 phase_margin"""
    rng = make_rng(seed)
    for attempt in range(MAX_RESAMPLE):
        problem = GateProblem.create(haar_unitary(n, rng))
        if math.pi - abs(problem.theta0) >= phase_margin:
            if attempt:
                logger.warning("N = %d, 种子 %d: 本征相位接近 π, 重采样 %d 次", n, seed, attempt)
            return problem, attempt
    raise LandscapeError(f"N = {n} 种子 {seed}: {MAX_RESAMPLE} 次内未采到远离 π 的目标门")


def pathological_gate(n: int, seed: int) -> GateProblem:
    """含本征值 −1 的目标门 (U₀ = I 时不收敛)"""
    rng = make_rng(seed)
    v = haar_unitary(n, rng)
    phases = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
    phases[0] = np.pi
    z = np.exp(-1j * phases)
    z[0] = -1.0
    return GateProblem.create(dagger(v) @ (z[:, None] * v))


def _residual_limit(kind: StudyKind) -> float:
    return SIMPLEX_FAILURE_TOL if kind is StudyKind.OBSERVABLE else UNITARY_FAILURE_TOL


def run_instance(config: StudyConfig, n: int, seed: int) -> InstanceRecord:
    """测量单个实例; 仅由 (kind, N, seed) 与配置决定, 可重放"""
    problem: Problem
    if config.kind is StudyKind.OBSERVABLE:
        problem, resampled = draw_observable(n, seed, config.fixed_mu, config.min_gap)
        theta0 = math.nan
    else:
        problem, resampled = draw_gate(n, seed, config.phase_margin)
        theta0 = problem.theta0
    report = measure_tc(problem, config.halt, config.options)
    trajectory = report.distance_curve
    assert trajectory is not None

    length, length_bound = math.nan, math.nan
    if config.measure_path:
        length = path_length(trajectory, problem)
        if report.gate_bound is not None:
            length_bound = bound_path_length(theta0, n, report.gate_bound.x_c_minus)

    residual = trajectory.max_residual()
    failure = residual > _residual_limit(config.kind) or not report.converged
    violation = report.bound_violated or (
        math.isfinite(length_bound) and length > length_bound
    )
    if failure or violation:
        logger.warning("实例 (%s, N=%d, seed=%d) 失败, 可用 replay 重放", config.kind.value, n, seed)
    return InstanceRecord(
        kind=config.kind.value,
        n=n,
        seed=seed,
        t_measured=report.t_measured,
        bound_eps=report.bound_tc_eps,
        bound_region=report.bound_tc_region,
        bound_total=report.bound_tc_total,
        converged=report.converged,
        path_length=length,
        path_bound=length_bound,
        invariant_max_residual=residual,
        resampled=resampled,
        theta0=theta0,
        invariant_failure=failure,
        bound_violation=violation,
    )


def fit_log_scaling(ns: Sequence[float], values: Sequence[float]) -> Optional[LinearFit]:
    """最小二乘拟合 values 对 ln N"""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.asarray(values, dtype=np.float64)
    ok = np.isfinite(y)
    if np.unique(x[ok]).size < 2:
        return None
    res = stats.linregress(x[ok], y[ok])
    return LinearFit(float(res.slope), float(res.intercept), float(res.rvalue**2))


def run_scaling_study(config: StudyConfig) -> ScalingStudy:
    """按维度与实例序号运行全部实例并拟合标度律"""
    jobs = [
        (n, instance_seed(config.seed, n, idx))
        for n in config.dims
        for idx in range(config.instances_per_dim)
    ]
    logger.info("标度研究 %s: %d 个实例, %d 线程", config.kind.value, len(jobs), config.threads)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(lambda job: run_instance(config, *job), jobs))
    else:
        records = [run_instance(config, n, seed) for n, seed in jobs]

    study = ScalingStudy(config=config, records=records)
    converged = [r for r in records if r.converged]
    study.fit = fit_log_scaling([r.n for r in converged], [r.t_measured for r in converged])
    if config.measure_path:
        dims = sorted({r.n for r in converged})
        means = [np.mean([r.path_length for r in converged if r.n == n]) for n in dims]
        study.path_fit = fit_log_scaling(dims, np.log(means))
    return study


# ---------------------------------------------------------------- 盆地边界


def basin_boundary_sweep(
    kind: StudyKind,
    etas: Sequence[float],
    n: int,
    seed: int,
    halt: HaltSpec,
    options: Optional[IntegratorOptions] = None,
) -> List[Tuple[float, float]]:
    """初值逼近病态集合时收敛时间的变化; 返回 (η, t_measured) 列表"""
    kind = StudyKind(kind)
    rng = make_rng(seed)
    out = []
    if kind is StudyKind.OBSERVABLE:
        spectrum = fixed_gap_spectrum(n, rng)
        for eta in etas:
            x0 = np.full(n, (1.0 - eta) / (n - 1))
            x0[0] = eta
            problem: Problem = ObservableProblem(spectrum, SimplexPoint.normalized(x0))
            out.append((float(eta), measure_tc(problem, halt, options).t_measured))
    else:
        v = haar_unitary(n, rng)
        for eta in etas:
            phases = np.zeros(n)
            phases[0] = np.pi - eta
            w = dagger(v) @ (np.exp(-1j * phases)[:, None] * v)
            problem = GateProblem.create(w)
            out.append((float(eta), measure_tc(problem, halt, options).t_measured))
    return out
