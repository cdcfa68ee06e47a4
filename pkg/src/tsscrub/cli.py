"""Command-line surface: inject | mine | detect | train | clean | eval | report.

Exit codes: 0 success, 1 usage error, 2 data error. All randomness comes from
explicit seeds, so identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys

from tsscrub import agents, bench, downstream, miner, quality, trainer
from tsscrub.bench import InjectionSpec
from tsscrub.core import ConstraintSet, DataError, EvaluationReport
from tsscrub.detect import DetectorConfig
from tsscrub.downstream import TIER_COMPLEX, TaskSpec
from tsscrub.ingest import read_frame, write_csv
from tsscrub.miner import MinerConfig
from tsscrub.operators import default_registry
from tsscrub.trainer import TrainConfig


def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON in {path}: {exc}") from exc


def _cmd_inject(args) -> int:
    clean = read_frame(args.inp, args.timestamp_format)
    spec_doc = _load_json(args.spec)
    if args.seed is not None:
        spec_doc["seed"] = args.seed
    spec = InjectionSpec.from_dict(spec_doc)
    raw, ledger = bench.inject(clean, spec)
    write_csv(raw, args.out)
    bench.save_ledger(ledger, args.ledger)
    return 0


def _cmd_mine(args) -> int:
    frame = read_frame(args.inp, args.timestamp_format)
    cfg = MinerConfig.from_dict(_load_json(args.config)) if args.config else MinerConfig()
    constraints = miner.mine_all(frame, cfg)
    _dump_json(constraints.to_dict(), args.out)
    return 0


def _cmd_detect(args) -> int:
    frame = read_frame(args.inp, args.timestamp_format)
    constraints = ConstraintSet.from_dict(_load_json(args.constraints))
    q, masks = quality.rates(frame, constraints, DetectorConfig())
    _dump_json(
        {
            "cells": frame.values.size,
            "n_missing": int(masks.missing.sum()),
            "n_outlier": int(masks.outlier.sum()),
            "n_violation": int(masks.violation.sum()),
            **q.to_dict(),
        },
        args.out,
    )
    return 0


def _suffixed(path: str, i: int) -> str:
    stem, dot, ext = path.rpartition(".")
    if not dot:
        return f"{path}.run{i}"
    return f"{stem}.run{i}.{ext}"


def _cmd_train(args) -> int:
    frame = read_frame(args.inp, args.timestamp_format)
    config = TrainConfig.from_dict(_load_json(args.config))
    if args.parallel_runs <= 1:
        bundle, log = trainer.train(frame, config)
        agents.save(bundle, args.out)
        trainer.save_log(log, args.log)
        return 0
    for i in range(args.parallel_runs):
        run_cfg = TrainConfig.from_dict({**config.to_dict(), "seed": config.seed + i})
        bundle, log = trainer.train(frame, run_cfg)
        agents.save(bundle, _suffixed(args.out, i))
        trainer.save_log(log, _suffixed(args.log, i))
    return 0


def _cmd_clean(args) -> int:
    frame = read_frame(args.inp, args.timestamp_format)
    registry = default_registry()
    bundle = agents.load(args.agent, registry)
    task = TaskSpec.from_dict(_load_json(args.task)) if args.task else None
    constraints = (
        ConstraintSet.from_dict(_load_json(args.constraints)) if args.constraints else None
    )
    cleaned, pipeline = trainer.infer(frame, bundle, registry, constraints, task)
    write_csv(cleaned, args.out)
    trainer.save_pipeline(pipeline, args.pipeline)
    return 0


def _cmd_eval(args) -> int:
    dirty = read_frame(args.dirty, args.timestamp_format)
    cleaned = read_frame(args.cleaned, args.timestamp_format)
    ledger = bench.load_ledger(args.ledger)
    task = TaskSpec.from_dict(_load_json(args.task))
    if args.constraints:
        constraints = ConstraintSet.from_dict(_load_json(args.constraints))
    else:
        constraints = miner.mine_all(dirty)
    _, masks = quality.rates(dirty, constraints, DetectorConfig())
    up = bench.upstream_metrics(dirty, cleaned, ledger, masks)
    perf_dirty = downstream.evaluate(dirty, task, TIER_COMPLEX)
    perf_clean = downstream.evaluate(cleaned, task, TIER_COMPLEX)
    report = EvaluationReport(
        up.f1, up.nmse, up.rra, perf_dirty, perf_clean, perf_clean - perf_dirty, task.task
    )
    doc = report.to_dict()
    doc["no_errors"] = up.no_errors
    _dump_json(doc, args.out)
    csv_path = args.csv or (args.out.rsplit(".", 1)[0] + ".csv")
    fields = ["task", "f1", "nmse", "rra", "perf_dirty", "perf_clean", "delta_perf"]
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(fields) + "\n")
        fh.write(",".join("" if doc[f] is None else str(doc[f]) for f in fields) + "\n")
    return 0


def _cmd_report(args) -> int:
    log = _load_json(args.log)
    episodes = log["episodes"]
    header = f"{'ep':>4} {'len':>4} {'fin':>4} {'mean_high':>10} {'sparse':>9} {'eps':>6}"
    print(header)
    print("-" * len(header))
    for i, ep in enumerate(episodes):
        steps = ep["steps"]
        mean_high = (
            sum(s["reward"]["high_total"] for s in steps) / len(steps) if steps else 0.0
        )
        print(
            f"{i:>4} {len(steps):>4} {'y' if ep['finished'] else 'n':>4} "
            f"{mean_high:>10.4f} {ep['sparse']:>9.4f} {ep['epsilon']:>6.3f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsscrub", description="Multivariate time-series cleaning toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_ts_format(p):
        p.add_argument(
            "--timestamp-format", choices=("int", "iso8601"), default="int",
            help="how the first CSV column is parsed",
        )

    p = sub.add_parser("inject", help="corrupt a clean CSV, emitting a ground-truth ledger")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spec", required=True, help="InjectionSpec JSON")
    p.add_argument("--seed", type=int, default=None, help="overrides the seed in the injection-spec file")
    p.add_argument("--out", required=True)
    p.add_argument("--ledger", required=True)
    add_ts_format(p)
    p.set_defaults(func=_cmd_inject)

    p = sub.add_parser("mine", help="mine constraints from a dirty CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="MinerConfig JSON")
    add_ts_format(p)
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("detect", help="compute quality rates for a dirty CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--constraints", required=True)
    p.add_argument("--out", required=True)
    add_ts_format(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("train", help="train the hierarchical cleaning agents")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--config", required=True, help="TrainConfig JSON")
    p.add_argument("--out", required=True, help="agent bundle output path")
    p.add_argument("--log", required=True, help="training log output path")
    p.add_argument("--parallel-runs", type=int, default=1)
    add_ts_format(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("clean", help="clean a dirty CSV with trained agents")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pipeline", required=True)
    p.add_argument("--task", default=None, help="TaskSpec JSON override (e.g. labels)")
    p.add_argument("--constraints", default=None, help="pre-mined ConstraintSet JSON")
    add_ts_format(p)
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("eval", help="score a cleaned CSV against the ledger")
    p.add_argument("--dirty", required=True)
    p.add_argument("--cleaned", required=True)
    p.add_argument("--ledger", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--constraints", default=None)
    p.add_argument("--csv", default=None, help="flat CSV row path (default: out stem)")
    add_ts_format(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="print per-episode reward curves from a train log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
