#!/usr/bin/env python3
"""
实验场景模块
把配置映射到具体的实例批次, 汇总每个实例的记录和整体摘要
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .complexity import (
    HaltSpec,
    InstanceRecord,
    LinearFit,
    ScalingStudy,
    StudyConfig,
    StudyKind,
    draw_gate,
    draw_observable,
    measure_tc,
    pathological_gate,
    run_instance,
    run_scaling_study,
)
from .config import ExperimentConfig, Scenario
from .dyncontrol import (
    ControlField,
    ControlSystem,
    Objective,
    check_chain_rule,
    fd_gradient,
    gradient,
    gradient_ascent,
)
from .flows import Source, analytic_gate_modes, analytic_x, integrate
from .matcore import (
    frobenius,
    gue_hermitian,
    haar_unitary,
    instance_seed,
    make_rng,
)

logger = logging.getLogger(__name__)

OBSERVABLE_ORACLE_TOL = 1e-8
GATE_ORACLE_TOL = 1e-6
FD_TOL = 1e-5
PATHOLOGY_TOL = 1e-6
PATHOLOGICAL_S_MAX = 10.0
CONVENTIONS = {
    "hamiltonian": "H(t) = H0 - eps(t) * mu, hbar = 1",
    "dipole": "mu(t) = -i U(t)^dagger mu U(t)",
    "field_gradient": "density per unit time at interval midpoints, sign fixed by central differences",
    "gate_precision": "gate bound evaluated at eps = epsilon_p**2 (squared Frobenius distance)",
}

InstanceResult = Tuple[InstanceRecord, Dict[str, Any]]


@dataclass
class ScenarioResult:
    scenario: Scenario
    records: List[InstanceRecord] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(r.invariant_failure for r in self.records)

    @property
    def violations(self) -> int:
        return sum(r.bound_violation for r in self.records)

    @property
    def failing(self) -> List[InstanceRecord]:
        return [r for r in self.records if r.invariant_failure or r.bound_violation]


def _blank_record(kind: str, n: int, seed: int) -> InstanceRecord:
    return InstanceRecord(
        kind=kind,
        n=n,
        seed=seed,
        t_measured=math.nan,
        bound_eps=math.nan,
        bound_region=math.nan,
        bound_total=math.nan,
        converged=True,
        path_length=math.nan,
        path_bound=math.nan,
        invariant_max_residual=0.0,
    )


def study_config(config: ExperimentConfig) -> StudyConfig:
    """把实验配置转换为标度研究配置"""
    gate_like = config.scenario in (Scenario.CONVERGE_GATE, Scenario.PATH_LENGTH_STUDY)
    return StudyConfig(
        kind=StudyKind.GATE if gate_like else StudyKind.OBSERVABLE,
        dims=config.dims,
        instances_per_dim=config.instances_per_dim,
        seed=config.seed,
        halt=HaltSpec(config.epsilon_p, config.require_region),
        options=config.options(),
        fixed_mu=config.fixed_mu,
        min_gap=config.min_gap,
        phase_margin=config.phase_margin,
        measure_path=config.scenario is Scenario.PATH_LENGTH_STUDY,
        threads=config.threads,
    )


# ---------------------------------------------------------------- 单实例


def analytic_check_instance(config: ExperimentConfig, n: int, seed: int) -> InstanceResult:
    """数值积分与闭式解的逐点比较 (可观测量复制子流 + A = I 门流)"""
    s_max = config.s_max or 10.0
    numeric = replace(config.integrator, source=Source.NUMERIC)

    observable, _ = draw_observable(n, seed, fixed_mu=False, min_gap=0.0)
    traj = integrate(observable, s_max, numeric)
    obs_dev = max(
        float(np.max(np.abs(p.state.x - analytic_x(p.s, observable).x))) for p in traj.samples
    )

    gate, _ = draw_gate(n, seed, phase_margin=0.0)
    traj_g = integrate(gate, s_max, numeric)
    gate_dev = max(frobenius(p.state - analytic_gate_modes(p.s, gate)) for p in traj_g.samples)

    record = _blank_record(Scenario.ANALYTIC_CHECK.value, n, seed)
    record.invariant_max_residual = max(traj.max_residual(), traj_g.max_residual())
    record.invariant_failure = obs_dev > OBSERVABLE_ORACLE_TOL or gate_dev > GATE_ORACLE_TOL
    if record.invariant_failure:
        logger.warning("N=%d seed=%d 解析/数值偏差超限: %.3e / %.3e", n, seed, obs_dev, gate_dev)
    return record, {"N": n, "seed": seed, "observable_deviation": obs_dev, "gate_deviation": gate_dev}


def pathological_gate_instance(config: ExperimentConfig, n: int, seed: int) -> InstanceResult:
    """含 −1 本征值的目标门, U₀ = I: 预期不收敛且距离始终 ≥ 2"""
    problem = pathological_gate(n, seed)
    s_max = min(config.s_max or PATHOLOGICAL_S_MAX, PATHOLOGICAL_S_MAX)
    options = replace(config.options(), s_max=s_max)
    report = measure_tc(problem, HaltSpec(config.epsilon_p, config.require_region), options)
    traj = report.distance_curve
    assert traj is not None
    min_distance = float(np.min(traj.distances))

    record = _blank_record(Scenario.CONVERGE_GATE.value, n, seed)
    record.t_measured = report.t_measured
    record.bound_eps = report.bound_tc_eps
    record.bound_region = report.bound_tc_region
    record.bound_total = report.bound_tc_total
    record.converged = report.converged
    record.theta0 = problem.theta0
    record.invariant_max_residual = traj.max_residual()
    record.invariant_failure = (
        report.converged
        or min_distance < 2.0 - PATHOLOGY_TOL
        or record.invariant_max_residual > 1e-9
    )
    return record, {"N": n, "seed": seed, "min_distance": min_distance}


def demo_system(n: int, seed: int) -> Tuple[ControlSystem, ControlField, Objective, Objective]:
    """随机 n 能级系统、随机控制场以及两种目标函数"""
    rng = make_rng(seed)
    system = ControlSystem(gue_hermitian(n, rng), gue_hermitian(n, rng), horizon=2.0, steps=16)
    ctrl = ControlField(rng.normal(0.0, 0.5, size=system.steps))
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    phi1 = Objective.observable(np.outer(psi, psi.conj()), gue_hermitian(n, rng))
    phi2 = Objective.gate(haar_unitary(n, rng))
    return system, ctrl, phi1, phi2


def population_transfer() -> Tuple[ControlSystem, ControlField, Objective]:
    """二能级布居转移: H0 = σz, μ = σx, |0⟩ → |1⟩"""
    sz = np.diag([1.0, -1.0]).astype(np.complex128)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    system = ControlSystem(sz, sx, horizon=5.0, steps=50)
    objective = Objective.observable(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    return system, ControlField.constant(system.steps, 0.3), objective


def _relative_error(value: np.ndarray, reference: np.ndarray) -> float:
    scale = float(np.linalg.norm(reference))
    return float(np.linalg.norm(value - reference)) / max(scale, 1e-300)


def dyncontrol_instance(config: ExperimentConfig, n: int, seed: int) -> InstanceResult:
    """梯度有限差分校验、链式法则一阶收敛与 (N = 2 时) 布居转移梯度上升"""
    system, ctrl, phi1, phi2 = demo_system(n, seed)
    fd_errors = {
        objective.kind.value: _relative_error(
            gradient(system, ctrl, objective), fd_gradient(system, ctrl, objective)
        )
        for objective in (phi1, phi2)
    }
    chain = check_chain_rule(system, ctrl, phi2, 1e-4)
    chain_half = check_chain_rule(system, ctrl, phi2, 5e-5)
    ratio = chain_half / chain if chain > 0.0 else math.nan

    record = _blank_record(Scenario.DYNCONTROL_DEMO.value, n, seed)
    details: Dict[str, Any] = {
        "N": n,
        "seed": seed,
        "fd_relative_error": fd_errors,
        "chain_rule_residual": chain,
        "chain_rule_ratio": ratio,
    }
    reached = True
    if n == 2:
        demo, field0, objective = population_transfer()
        result = gradient_ascent(
            demo, field0, objective, HaltSpec(1e-3, require_region=False), max_iters=10000
        )
        final_phi = result.history[-1].phi
        reached = final_phi >= 0.999
        details["ascent"] = {
            "final_phi": final_phi,
            "iterations": len(result.history) - 1,
            "status": result.status,
        }
    record.converged = reached
    record.invariant_max_residual = max(fd_errors.values())
    record.invariant_failure = (
        record.invariant_max_residual > FD_TOL or not 0.4 <= ratio <= 0.6 or not reached
    )
    return record, details


# ---------------------------------------------------------------- 批次运行


def _map_instances(
    config: ExperimentConfig, fn: Callable[[ExperimentConfig, int, int], InstanceResult]
) -> List[InstanceResult]:
    jobs = [
        (n, instance_seed(config.seed, n, idx))
        for n in config.dims
        for idx in range(config.instances_per_dim)
    ]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(lambda job: fn(config, *job), jobs))
    return [fn(config, n, seed) for n, seed in jobs]


def _fit_dict(fit: Optional[LinearFit]) -> Optional[Dict[str, float]]:
    if fit is None:
        return None
    return {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}


def _base_summary(result: ScenarioResult) -> Dict[str, Any]:
    return {
        "scenario": result.scenario.value,
        "instances": len(result.records),
        "invariant_failures": result.failures,
        "bound_violations": result.violations,
        "failing_instances": [[r.n, r.seed] for r in result.failing],
        "conventions": CONVENTIONS,
    }


def _study_summary(config: ExperimentConfig, study: ScalingStudy) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "resampled": study.resampled,
        "non_convergent": sum(not r.converged for r in study.records),
        "fit_tc_vs_log_n": _fit_dict(study.fit),
    }
    if study.fit is not None:
        checks: Dict[str, Any] = {
            "r_squared_at_least_0.9": study.fit.r_squared >= 0.9,
            "slope_positive": study.fit.slope > 0.0,
        }
        if study.config.kind is StudyKind.OBSERVABLE and config.fixed_mu:
            checks["slope_within_bound_coefficient"] = study.fit.slope <= 1.25 / 2.0
        summary["checks"] = checks
    if study.config.measure_path:
        summary["fit_log_path_vs_log_n"] = _fit_dict(study.path_fit)
        if study.path_fit is not None:
            summary["path_exponent"] = study.path_fit.slope
            summary["path_exponent_in_0.5_1.0"] = 0.5 <= study.path_fit.slope <= 1.0
    return summary


def run_scenario(config: ExperimentConfig) -> ScenarioResult:
    """执行配置指定的场景"""
    result = ScenarioResult(scenario=config.scenario)
    extra: Dict[str, Any] = {}
    if config.scenario is Scenario.ANALYTIC_CHECK:
        pairs = _map_instances(config, analytic_check_instance)
        details = [d for _, d in pairs]
        extra["max_observable_deviation"] = max(d["observable_deviation"] for d in details)
        extra["max_gate_deviation"] = max(d["gate_deviation"] for d in details)
        extra["details"] = details
        result.records = [r for r, _ in pairs]
    elif config.scenario is Scenario.DYNCONTROL_DEMO:
        pairs = _map_instances(config, dyncontrol_instance)
        extra["details"] = [d for _, d in pairs]
        result.records = [r for r, _ in pairs]
    elif config.scenario is Scenario.CONVERGE_GATE and config.force_phase_pi:
        pairs = _map_instances(config, pathological_gate_instance)
        extra["non_convergent"] = sum(not r.converged for r, _ in pairs)
        extra["details"] = [d for _, d in pairs]
        result.records = [r for r, _ in pairs]
    else:
        study = run_scaling_study(study_config(config))
        result.records = study.records
        extra = _study_summary(config, study)
    for r in result.records:
        r.kind = config.scenario.value
    result.summary = {**_base_summary(result), **extra}
    return result


def replay_instance(config: ExperimentConfig, n: int, seed: int) -> InstanceResult:
    """仅凭 (场景, N, 实例种子) 重放单个实例"""
    if config.scenario is Scenario.ANALYTIC_CHECK:
        return analytic_check_instance(config, n, seed)
    if config.scenario is Scenario.DYNCONTROL_DEMO:
        return dyncontrol_instance(config, n, seed)
    if config.scenario is Scenario.CONVERGE_GATE and config.force_phase_pi:
        return pathological_gate_instance(config, n, seed)
    record = run_instance(study_config(config), n, seed)
    record.kind = config.scenario.value
    return record, {"N": n, "seed": seed}
