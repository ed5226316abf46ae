#!/usr/bin/env python3
"""
实验配置模块
解析并校验 JSON 实验配置, 所有诊断信息带字段名和行号
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .errors import ConfigError
from .flows import IntegratorOptions, Representation, Source
from .matcore import MAX_DIM

THREADS_ENV = "LANDSCAPE_THREADS"
DEFAULT_DIMS = (2, 4, 8)


class Scenario(str, Enum):
    ANALYTIC_CHECK = "analytic_check"
    CONVERGE_OBSERVABLE = "converge_observable"
    CONVERGE_GATE = "converge_gate"
    SCALING_STUDY = "scaling_study"
    PATH_LENGTH_STUDY = "path_length_study"
    DYNCONTROL_DEMO = "dyncontrol_demo"


@dataclass(frozen=True)
class ExperimentConfig:
    """一次实验运行的全部可调参数 (全部写入运行清单)"""

    scenario: Scenario
    dims: Tuple[int, ...] = DEFAULT_DIMS
    instances_per_dim: int = 2
    seed: int = 0
    epsilon_p: float = 0.01
    s_max: Optional[float] = None
    require_region: bool = True
    fixed_mu: bool = True
    min_gap: float = 0.05
    phase_margin: float = 0.1
    force_phase_pi: bool = False
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    threads: int = 1
    output_dir: str = "results"

    def options(self) -> IntegratorOptions:
        """积分器选项 (带上配置中的 s_max)"""
        return replace(self.integrator, s_max=self.s_max)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["scenario"] = self.scenario.value
        data["dims"] = list(self.dims)
        integ = data["integrator"]
        integ["representation"] = self.integrator.representation.value
        integ["source"] = self.integrator.source.value
        for key in ("s_max", "keep_states", "record_interval"):
            integ.pop(key, None)
        return data


def default_threads() -> int:
    """线程数取自环境变量 LANDSCAPE_THREADS, 缺省 1"""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError([(THREADS_ENV, f"环境变量不是整数: {raw!r}", None)])
    if value < 1:
        raise ConfigError([(THREADS_ENV, f"线程数必须 ≥ 1, 实际 {value}", None)])
    return value


# ---------------------------------------------------------------- 校验

_TOP_KEYS = {
    "scenario",
    "dims",
    "instances_per_dim",
    "seed",
    "epsilon_p",
    "s_max",
    "require_region",
    "fixed_mu",
    "min_gap",
    "phase_margin",
    "force_phase_pi",
    "integrator",
    "threads",
    "output_dir",
}
_INTEGRATOR_KEYS = {"representation", "source", "max_step", "step_scale", "min_step"}

Diagnostics = List[Tuple[str, str, Optional[int]]]


class _Validator:
    def __init__(self, text: str):
        self.text = text
        self.diagnostics: Diagnostics = []

    def line_of(self, key: str) -> Optional[int]:
        match = re.search(r'"' + re.escape(key) + r'"\s*:', self.text)
        if match is None:
            return None
        return self.text.count("\n", 0, match.start()) + 1

    def error(self, name: str, message: str, key: Optional[str] = None) -> None:
        self.diagnostics.append((name, message, self.line_of(key or name.split(".")[-1])))

    def number(
        self,
        data: Dict[str, Any],
        key: str,
        default: Any,
        lo: float,
        hi: float,
        integer: bool = False,
        lo_open: bool = False,
        prefix: str = "",
    ) -> Any:
        name = prefix + key
        if key not in data:
            return default
        value = data[key]
        kinds = (int,) if integer else (int, float)
        if isinstance(value, bool) or not isinstance(value, kinds):
            self.error(name, f"需要{'整数' if integer else '数值'}, 实际 {value!r}", key)
            return default
        if not math.isfinite(value):
            self.error(name, "必须是有限值", key)
            return default
        below = value <= lo if lo_open else value < lo
        if below or value > hi:
            left = "(" if lo_open else "["
            self.error(name, f"取值 {value} 超出范围 {left}{lo}, {hi}]", key)
            return default
        return value

    def flag(self, data: Dict[str, Any], key: str, default: bool) -> bool:
        if key not in data:
            return default
        value = data[key]
        if not isinstance(value, bool):
            self.error(key, f"需要布尔值, 实际 {value!r}")
            return default
        return value

    def choice(self, data: Dict[str, Any], key: str, enum: Any, default: Any, prefix: str = "") -> Any:
        if key not in data:
            return default
        try:
            return enum(data[key])
        except ValueError:
            allowed = ", ".join(e.value for e in enum)
            self.error(prefix + key, f"无效取值 {data[key]!r}, 可选: {allowed}", key)
            return default


def _validate_dims(v: _Validator, raw: Any) -> Tuple[int, ...]:
    if not isinstance(raw, list) or not raw:
        v.error("dims", "需要非空整数列表")
        return DEFAULT_DIMS
    dims = []
    for item in raw:
        if isinstance(item, bool) or not isinstance(item, int) or not 1 <= item <= MAX_DIM:
            v.error("dims", f"维度 {item!r} 必须是 [1, {MAX_DIM}] 内的整数")
            continue
        dims.append(item)
    return tuple(dims)


def _validate_integrator(v: _Validator, raw: Any) -> IntegratorOptions:
    defaults = IntegratorOptions()
    if raw is None:
        return defaults
    if not isinstance(raw, dict):
        v.error("integrator", "需要 JSON 对象")
        return defaults
    for key in sorted(set(raw) - _INTEGRATOR_KEYS):
        v.error(f"integrator.{key}", "未知字段", key)
    p = "integrator."
    max_step = v.number(raw, "max_step", defaults.max_step, 0.0, 1.0, lo_open=True, prefix=p)
    min_step = v.number(raw, "min_step", defaults.min_step, 0.0, 1.0, lo_open=True, prefix=p)
    if min_step >= max_step:
        v.error("integrator.min_step", f"min_step = {min_step} 必须小于 max_step = {max_step}", "min_step")
    return IntegratorOptions(
        representation=v.choice(raw, "representation", Representation, defaults.representation, p),
        source=v.choice(raw, "source", Source, defaults.source, p),
        max_step=max_step,
        step_scale=v.number(raw, "step_scale", defaults.step_scale, 0.0, 10.0, lo_open=True, prefix=p),
        min_step=min_step,
    )


def _check_output_dir(v: _Validator, raw: Any) -> str:
    if not isinstance(raw, str) or not raw:
        v.error("output_dir", "需要非空路径字符串")
        return "results"
    path = Path(raw)
    probe = path
    while not probe.exists():
        if probe.parent == probe:
            break
        probe = probe.parent
    if probe.exists() and (not probe.is_dir() or not os.access(probe, os.W_OK)):
        v.error("output_dir", f"路径不可写: {probe}")
    return raw


def parse_config(text: str, env_threads: Optional[int] = None) -> ExperimentConfig:
    """解析 JSON 文本为 ExperimentConfig; 任何问题都收集后一并抛出 ConfigError"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([("<json>", f"JSON 语法错误: {e.msg} (第 {e.colno} 列)", e.lineno)])
    if not isinstance(data, dict):
        raise ConfigError([("<json>", "顶层必须是 JSON 对象", 1)])

    v = _Validator(text)
    for key in sorted(set(data) - _TOP_KEYS):
        v.error(key, "未知字段")
    if "scenario" not in data:
        v.error("scenario", "缺少必填字段")
        scenario = Scenario.ANALYTIC_CHECK
    else:
        scenario = v.choice(data, "scenario", Scenario, Scenario.ANALYTIC_CHECK)

    defaults = ExperimentConfig(scenario=scenario)
    dims = _validate_dims(v, data["dims"]) if "dims" in data else defaults.dims
    if scenario in (Scenario.SCALING_STUDY, Scenario.CONVERGE_OBSERVABLE, Scenario.CONVERGE_GATE,
                    Scenario.PATH_LENGTH_STUDY) and any(n < 2 for n in dims):
        v.error("dims", "该场景要求所有维度 N ≥ 2")

    threads_default = env_threads if env_threads is not None else default_threads()
    config = ExperimentConfig(
        scenario=scenario,
        dims=dims,
        instances_per_dim=v.number(data, "instances_per_dim", defaults.instances_per_dim, 1, 100000, True),
        seed=v.number(data, "seed", defaults.seed, 0, 2**64 - 1, True),
        epsilon_p=v.number(data, "epsilon_p", defaults.epsilon_p, 0.0, 10.0, lo_open=True),
        s_max=None if data.get("s_max") is None else v.number(data, "s_max", None, 0.0, 1e4, lo_open=True),
        require_region=v.flag(data, "require_region", defaults.require_region),
        fixed_mu=v.flag(data, "fixed_mu", defaults.fixed_mu),
        min_gap=v.number(data, "min_gap", defaults.min_gap, 0.0, 0.99),
        phase_margin=v.number(data, "phase_margin", defaults.phase_margin, 0.0, 3.0),
        force_phase_pi=v.flag(data, "force_phase_pi", defaults.force_phase_pi),
        integrator=_validate_integrator(v, data.get("integrator")),
        threads=v.number(data, "threads", threads_default, 1, 256, True),
        output_dir=_check_output_dir(v, data.get("output_dir", defaults.output_dir)),
    )
    if v.diagnostics:
        raise ConfigError(v.diagnostics)
    return config


def load_config(path: str) -> ExperimentConfig:
    """从文件读取配置"""
    p = Path(path)
    if not p.is_file():
        raise ConfigError([("<file>", f"配置文件不存在: {path}", None)])
    return parse_config(p.read_text(encoding="utf-8"))
