"""End-to-end CLI flows: the six-command chain, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from tsscrub import bench
from tsscrub.cli import main
from tsscrub.ingest import write_csv
from tsscrub.trainer import TrainConfig


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Seeded clean corpus CSV plus the config files the commands need."""
    root = tmp_path_factory.mktemp("cliflow")
    clean, task = bench.make_synthetic("forecast-sine-trend", 0)
    write_csv(clean, root / "clean.csv")
    (root / "inj.json").write_text(json.dumps(bench.InjectionSpec(seed=2).to_dict()))
    cfg = TrainConfig(task, episodes=12, l_max=3, seed=0)
    (root / "train.json").write_text(json.dumps(cfg.to_dict()))
    (root / "task.json").write_text(json.dumps(task.to_dict()))
    return root


def _run(*argv):
    return main([str(a) for a in argv])


def test_full_six_command_chain(workdir):
    d = workdir
    assert _run(
        "inject", "--in", d / "clean.csv", "--spec", d / "inj.json",
        "--seed", 2, "--out", d / "dirty.csv", "--ledger", d / "ledger.json",
    ) == 0
    assert _run("mine", "--in", d / "dirty.csv", "--out", d / "constraints.json") == 0
    assert _run(
        "detect", "--in", d / "dirty.csv",
        "--constraints", d / "constraints.json", "--out", d / "rates.json",
    ) == 0
    rates = json.loads((d / "rates.json").read_text())
    assert rates["r_missing"] > 0
    assert rates["cells"] == 512 * 4
    assert _run(
        "train", "--in", d / "dirty.csv", "--config", d / "train.json",
        "--out", d / "agent.json", "--log", d / "train_log.json",
    ) == 0
    assert _run(
        "clean", "--in", d / "dirty.csv", "--agent", d / "agent.json",
        "--out", d / "cleaned.csv", "--pipeline", d / "pipeline.json",
    ) == 0
    assert _run(
        "eval", "--dirty", d / "dirty.csv", "--cleaned", d / "cleaned.csv",
        "--ledger", d / "ledger.json", "--task", d / "task.json",
        "--out", d / "report.json",
    ) == 0
    report = json.loads((d / "report.json").read_text())
    assert report["rra"] is not None and report["rra"] >= 0
    for key in ("f1", "nmse", "perf_dirty", "perf_clean", "delta_perf", "task"):
        assert report[key] is not None
    csv_lines = (d / "report.csv").read_text().splitlines()
    assert csv_lines[0].startswith("task,f1,nmse")
    assert len(csv_lines) == 2


def test_clean_accepts_premined_constraints(workdir, tmp_path):
    d = workdir
    assert _run(
        "clean", "--in", d / "dirty.csv", "--agent", d / "agent.json",
        "--constraints", d / "constraints.json",
        "--out", tmp_path / "c.csv", "--pipeline", tmp_path / "p.json",
    ) == 0
    assert (tmp_path / "c.csv").exists()


def test_report_command_prints_table(workdir, capsys):
    assert _run("report", "--log", workdir / "train_log.json") == 0
    out = capsys.readouterr().out
    assert "sparse" in out.splitlines()[0]
    assert len(out.splitlines()) >= 12  # one row per episode


def test_unknown_flag_exits_one(workdir, capsys):
    assert _run("mine", "--in", workdir / "dirty.csv", "--wat", "x") == 1


def test_unknown_command_exits_one():
    assert _run("frobnicate") == 1


def test_missing_file_exits_two(workdir):
    assert _run("mine", "--in", workdir / "absent.csv", "--out", workdir / "c.json") == 2


def test_malformed_csv_exits_two(workdir, capsys):
    bad = workdir / "bad.csv"
    bad.write_text("t,a\n5,1\n3,2\n")
    assert _run("mine", "--in", bad, "--out", workdir / "c.json") == 2


def test_clean_with_mismatched_agent_exits_two_naming_operator(workdir, capsys):
    agent_doc = json.loads((workdir / "agent.json").read_text())
    agent_doc["low"]["M"]["op_ids"][0] = "m.renamed"
    bad_agent = workdir / "bad_agent.json"
    bad_agent.write_text(json.dumps(agent_doc))
    code = _run(
        "clean", "--in", workdir / "dirty.csv", "--agent", bad_agent,
        "--out", workdir / "x.csv", "--pipeline", workdir / "x.json",
    )
    assert code == 2
    assert "m.renamed" in capsys.readouterr().err


def test_byte_identical_reruns(workdir, tmp_path):
    d = workdir
    for i in (1, 2):
        assert _run(
            "train", "--in", d / "dirty.csv", "--config", d / "train.json",
            "--out", tmp_path / f"agent{i}.json", "--log", tmp_path / f"log{i}.json",
        ) == 0
        assert _run(
            "clean", "--in", d / "dirty.csv", "--agent", tmp_path / f"agent{i}.json",
            "--out", tmp_path / f"cleaned{i}.csv", "--pipeline", tmp_path / f"pipe{i}.json",
        ) == 0
    assert (tmp_path / "agent1.json").read_bytes() == (tmp_path / "agent2.json").read_bytes()
    assert (tmp_path / "cleaned1.csv").read_bytes() == (tmp_path / "cleaned2.csv").read_bytes()
    assert (tmp_path / "pipe1.json").read_bytes() == (tmp_path / "pipe2.json").read_bytes()


def test_parallel_runs_fan_out(workdir, tmp_path):
    d = workdir
    cfg = json.loads((d / "train.json").read_text())
    cfg["episodes"] = 3
    (tmp_path / "small.json").write_text(json.dumps(cfg))
    assert _run(
        "train", "--in", d / "dirty.csv", "--config", tmp_path / "small.json",
        "--out", tmp_path / "agent.json", "--log", tmp_path / "log.json",
        "--parallel-runs", 2,
    ) == 0
    for i in (0, 1):
        assert (tmp_path / f"agent.run{i}.json").exists()
        assert (tmp_path / f"log.run{i}.json").exists()
    seeds = {
        json.loads((tmp_path / f"agent.run{i}.json").read_text())["train_config"]["seed"]
        for i in (0, 1)
    }
    assert seeds == {0, 1}
