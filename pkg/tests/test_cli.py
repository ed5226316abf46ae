#!/usr/bin/env python3
"""
命令行测试: 退出码、输出文件与可重放性
"""

import csv
import json
import shlex

import pytest

from src.cli import CSV_COLUMNS, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, format_float, main, replay_command
from src.complexity import InstanceRecord
from src.config import load_config
from src.matcore import instance_seed


def _write(tmp_path, name, **data):
    data.setdefault("output_dir", str(tmp_path / (name + "_out")))
    path = tmp_path / (name + ".json")
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return str(path), tmp_path / (name + "_out")


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize(
    "value, text",
    [(0.1, "0.10000000000000001"), (float("nan"), "nan"), (float("inf"), "inf"), (2.0, "2")],
)
def test_format_float(value, text):
    assert format_float(value) == text


def test_validate(tmp_path, capsys):
    good, _ = _write(tmp_path, "good", scenario="analytic_check", dims=[2])
    assert main(["validate", good]) == EXIT_OK
    assert "✅" in capsys.readouterr().out

    bad, _ = _write(tmp_path, "bad", scenario="analytic_check", epsilon_p=-1.0)
    assert main(["validate", bad]) == EXIT_CONFIG
    assert "epsilon_p" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "none.json")]) == EXIT_CONFIG


def test_bad_thread_override(tmp_path):
    path, _ = _write(tmp_path, "t", scenario="analytic_check", dims=[2])
    assert main(["--threads", "0", "run", path]) == EXIT_CONFIG


def test_run_analytic_check(tmp_path):
    path, out = _write(tmp_path, "ac", scenario="analytic_check", dims=[2], instances_per_dim=1, s_max=2.0)
    assert main(["run", path]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 0
    assert manifest["config"]["scenario"] == "analytic_check"
    assert manifest["csv_columns"] == CSV_COLUMNS
    rows = _read_csv(out / "records.csv")
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 2
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["invariant_failures"] == 0
    assert summary["max_observable_deviation"] <= 1e-8
    assert summary["max_gate_deviation"] <= 1e-6


def test_scaling_study_is_bit_identical(tmp_path):
    outputs = []
    for name in ("first", "second"):
        path, out = _write(tmp_path, name, scenario="scaling_study", dims=[2, 4], instances_per_dim=2, seed=5)
        assert main(["run", path]) == EXIT_OK
        outputs.append((out / "records.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_threads_do_not_change_results(tmp_path):
    serial, out_serial = _write(tmp_path, "serial", scenario="converge_observable", dims=[2, 4], seed=3)
    threaded, out_threaded = _write(tmp_path, "threaded", scenario="converge_observable", dims=[2, 4], seed=3)
    assert main(["run", serial]) == EXIT_OK
    assert main(["--threads", "2", "run", threaded]) == EXIT_OK
    assert (out_serial / "records.csv").read_bytes() == (out_threaded / "records.csv").read_bytes()


def test_pathological_gate_flagged(tmp_path):
    path, out = _write(
        tmp_path, "pi", scenario="converge_gate", dims=[2], instances_per_dim=1, force_phase_pi=True
    )
    assert main(["run", path]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["non_convergent"] == 1
    rows = _read_csv(out / "records.csv")
    assert rows[1][CSV_COLUMNS.index("converged")] == "false"


def _replay_lines(text):
    return [shlex.split(line.split("重放:", 1)[1]) for line in text.splitlines() if "重放:" in line]


def test_non_convergence_exits_one(tmp_path, capsys):
    path, _ = _write(tmp_path, "short", scenario="converge_observable", dims=[4], instances_per_dim=1, s_max=0.01)
    assert main(["run", path]) == EXIT_FAILURE
    commands = _replay_lines(capsys.readouterr().out)
    assert len(commands) == 1
    assert commands[0][:3] == ["replay", "--config", path]
    assert commands[0][3:5] == ["converge_observable", "4"]


def test_printed_replay_reproduces_failure(tmp_path, capsys):
    path, out = _write(
        tmp_path,
        "tuned",
        scenario="converge_observable",
        dims=[6],
        instances_per_dim=1,
        seed=17,
        epsilon_p=0.05,
        fixed_mu=False,
        min_gap=0.1,
        s_max=0.02,
    )
    assert main(["run", path]) == EXIT_FAILURE
    command = _replay_lines(capsys.readouterr().out)[0]
    row = _read_csv(out / "records.csv")[1]
    assert main(command) == EXIT_FAILURE
    assert capsys.readouterr().out.splitlines()[1] == ",".join(row)


def test_replay_command_carries_pathological_flag(tmp_path):
    path, _ = _write(tmp_path, "pi", scenario="converge_gate", dims=[2], force_phase_pi=True)
    config = load_config(path)
    nan = float("nan")
    record = InstanceRecord("converge_gate", 2, 77, float("inf"), nan, nan, nan, False, nan, nan, 0.0)
    command = shlex.split(replay_command(config, path, record))
    assert command == ["replay", "--config", path, "--force-phase-pi", "converge_gate", "2", "77"]



def test_replay(capsys):
    seed = instance_seed(0, 4, 0)
    assert main(["replay", "scaling_study", "4", str(seed)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith(f"scaling_study,4,{seed},")


def test_replay_matches_run(tmp_path, capsys):
    path, out = _write(tmp_path, "rp", scenario="scaling_study", dims=[4], instances_per_dim=1, seed=9)
    assert main(["run", path]) == EXIT_OK
    row = _read_csv(out / "records.csv")[1]
    capsys.readouterr()
    assert main(["replay", "--config", path, "scaling_study", row[1], row[2]]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1] == ",".join(row)


def test_replay_unknown_scenario():
    assert main(["replay", "nope", "2", "1"]) == EXIT_CONFIG
