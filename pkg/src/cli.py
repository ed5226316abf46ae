#!/usr/bin/env python3
"""
命令行入口
run / validate / replay 三个子命令, 结果写入运行清单、CSV 记录和 JSON 摘要

退出码: 0 成功; 1 不变量失败或上界被违反; 2 配置无效
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import shlex
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, List, Optional, Sequence

from . import __version__
from .complexity import InstanceRecord
from .config import ExperimentConfig, Scenario, default_threads, load_config
from .errors import ConfigError, LandscapeError
from .scenarios import CONVENTIONS, ScenarioResult, replay_instance, run_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

CSV_COLUMNS = [
    "scenario",
    "N",
    "seed",
    "t_measured",
    "bound_eps",
    "bound_region",
    "bound_total",
    "converged",
    "path_length",
    "path_bound",
    "invariant_max_residual",
]


def format_float(value: float) -> str:
    """17 位有效数字, 保证逐位可重放"""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def record_row(record: InstanceRecord) -> List[str]:
    return [
        record.kind,
        str(record.n),
        str(record.seed),
        format_float(record.t_measured),
        format_float(record.bound_eps),
        format_float(record.bound_region),
        format_float(record.bound_total),
        "true" if record.converged else "false",
        format_float(record.path_length),
        format_float(record.path_bound),
        format_float(record.invariant_max_residual),
    ]


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_float(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


def write_outputs(config: ExperimentConfig, result: ScenarioResult) -> Path:
    """单一写入者: 依次写 manifest.json, records.csv, summary.json"""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "conventions": CONVENTIONS,
        "csv_columns": CSV_COLUMNS,
    }
    (out / "manifest.json").write_text(
        json.dumps(_jsonable(manifest), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    with open(out / "records.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in result.records:
            writer.writerow(record_row(record))
    (out / "summary.json").write_text(
        json.dumps(_jsonable(result.summary), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return out


def replay_command(config: ExperimentConfig, config_path: str, record: InstanceRecord) -> str:
    """可直接复制执行的重放命令, 带上配置文件以复现全部可调参数"""
    parts = ["replay", "--config", shlex.quote(config_path)]
    if config.force_phase_pi:
        parts.append("--force-phase-pi")
    parts += [config.scenario.value, str(record.n), str(record.seed)]
    return " ".join(parts)


def _report_config_error(err: ConfigError) -> int:
    print("❌ 配置无效:", file=sys.stderr)
    for field, message, line in err.diagnostics:
        where = f"第 {line} 行" if line is not None else "-"
        print(f"   {where}  {field}: {message}", file=sys.stderr)
    return EXIT_CONFIG


def _with_threads(config: ExperimentConfig, threads: Optional[int]) -> ExperimentConfig:
    if threads is None:
        return config
    if threads < 1:
        raise ConfigError([("--threads", f"线程数必须 ≥ 1, 实际 {threads}", None)])
    return replace(config, threads=threads)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = _with_threads(load_config(args.config), args.threads)
    except ConfigError as e:
        return _report_config_error(e)

    print(f"▶ 场景 {config.scenario.value}: 维度 {list(config.dims)}, 每维 {config.instances_per_dim} 个实例")
    try:
        result = run_scenario(config)
    except LandscapeError as e:
        print(f"❌ 运行失败: {e}", file=sys.stderr)
        return EXIT_FAILURE
    out = write_outputs(config, result)
    print(f"📁 结果已写入: {out}")

    if result.failures or result.violations:
        print(f"❌ 不变量失败 {result.failures} 个, 上界违反 {result.violations} 个")
        for r in result.failing:
            print(f"   重放: {replay_command(config, args.config, r)}")
        return EXIT_FAILURE
    print(f"✅ 全部 {len(result.records)} 个实例通过")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as e:
        return _report_config_error(e)
    print(f"✅ 配置有效: 场景 {config.scenario.value}, 输出目录 {config.output_dir}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        scenario = Scenario(args.scenario)
    except ValueError:
        allowed = ", ".join(s.value for s in Scenario)
        return _report_config_error(ConfigError([("scenario", f"未知场景, 可选: {allowed}", None)]))
    try:
        if args.config:
            config = replace(load_config(args.config), scenario=scenario)
        else:
            config = ExperimentConfig(scenario=scenario, threads=default_threads())
    except ConfigError as e:
        return _report_config_error(e)
    if args.force_phase_pi:
        config = replace(config, force_phase_pi=True)

    try:
        record, details = replay_instance(config, args.n, args.seed)
    except LandscapeError as e:
        return _report_config_error(ConfigError([("replay", str(e), None)]))
    print(",".join(CSV_COLUMNS))
    print(",".join(record_row(record)))
    print(json.dumps(_jsonable(details), ensure_ascii=False))
    if record.invariant_failure or record.bound_violation:
        print("❌ 实例未通过检查")
        return EXIT_FAILURE
    print("✅ 实例通过检查")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landscape", description="量子控制景观梯度流: 积分、收敛时间测量与上界审计"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="输出调试日志")
    parser.add_argument("--threads", type=int, default=None, help="并行实例线程数 (覆盖配置与环境变量)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="按配置运行实验")
    p_run.add_argument("config", help="JSON 配置文件")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="只校验配置")
    p_val.add_argument("config", help="JSON 配置文件")
    p_val.set_defaults(func=cmd_validate)

    p_rep = sub.add_parser("replay", help="由 (场景, N, 种子) 重放单个实例")
    p_rep.add_argument("scenario", help="场景名")
    p_rep.add_argument("n", type=int, help="维度 N")
    p_rep.add_argument("seed", type=int, help="实例种子 (见 records.csv)")
    p_rep.add_argument("--config", default=None, help="提供其余可调参数的 JSON 配置")
    p_rep.add_argument("--force-phase-pi", action="store_true", help="converge_gate 的病态实例")
    p_rep.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.func(args))
    except KeyboardInterrupt:
        print("\n⚠️ 用户中断")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
