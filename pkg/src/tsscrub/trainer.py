"""Episode-based training of the hierarchical agents and greedy inference.

Per episode the environment resets to the original dirty frame; the high
agent picks an issue category (F terminates), the low agent picks a concrete
operator, the operator is applied, both agents receive dense updates, and
the finished pipeline earns a terminal complex-model reward on the final
high-level pair. Constraints are mined once on the initial dirty frame and
held fixed so violation semantics stay comparable across episodes.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from tsscrub import agents, downstream, miner, quality, rewards
from tsscrub.agents import AgentBundle, Hyper
from tsscrub.core import (
    CleaningPipeline,
    ConstraintSet,
    DataError,
    OperatorDescriptor,
    StepProvenance,
    TimeSeriesFrame,
)
from tsscrub.detect import DetectorConfig
from tsscrub.downstream import TIER_COMPLEX, TIER_LITE, TaskSpec
from tsscrub.miner import MinerConfig
from tsscrub.operators import ApplyResult, OperatorContext, OperatorRegistry, default_registry
from tsscrub.rewards import IMPROVEMENT_THRESHOLD, RewardWeights


@dataclass(frozen=True)
class TrainConfig:
    task: TaskSpec
    episodes: int = 200
    l_max: int = 10
    seed: int = 0
    weights: RewardWeights = RewardWeights()
    miner: MinerConfig = MinerConfig()
    detector: DetectorConfig = DetectorConfig()
    hyper: Hyper = Hyper()

    def __post_init__(self):
        if self.episodes < 1 or self.l_max < 1:
            raise ValueError("episodes and l_max must be >= 1")

    def to_dict(self) -> dict:
        return {
            "detector": self.detector.to_dict(),
            "episodes": self.episodes,
            "hyper": self.hyper.to_dict(),
            "l_max": self.l_max,
            "miner": self.miner.to_dict(),
            "seed": self.seed,
            "task": self.task.to_dict(),
            "weights": self.weights.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TrainConfig":
        return TrainConfig(
            TaskSpec.from_dict(d["task"]),
            d.get("episodes", 200),
            d.get("l_max", 10),
            d.get("seed", 0),
            RewardWeights.from_dict(d["weights"]) if "weights" in d else RewardWeights(),
            MinerConfig.from_dict(d["miner"]) if "miner" in d else MinerConfig(),
            DetectorConfig.from_dict(d["detector"]) if "detector" in d else DetectorConfig(),
            Hyper.from_dict(d["hyper"]) if "hyper" in d else Hyper(),
        )


@dataclass
class _StepOutcome:
    frame: TimeSeriesFrame
    rates: quality.QualityRates
    masks: quality.RateMasks
    bins: tuple
    p_lite: float


class _Env:
    """Caches rates/state features/lite perf per frame transition."""

    def __init__(self, frame, constraints, config):
        self.constraints = constraints
        self.config = config
        self.initial = self._measure(frame)

    def _measure(self, frame) -> _StepOutcome:
        q, masks = quality.rates(frame, self.constraints, self.config.detector)
        bins = quality.feature_bins(frame)
        p = downstream.evaluate(frame, self.config.task, TIER_LITE)
        return _StepOutcome(frame, q, masks, bins, p)

    def step(self, prev: _StepOutcome, applied: ApplyResult) -> _StepOutcome:
        if applied.cells_changed == 0:
            return prev
        return self._measure(applied.frame)


def _next_high_actions(q: quality.QualityRates) -> list[str]:
    return ["M"] if q.r_missing > 0 else ["O", "C", "F"]


def train(
    frame: TimeSeriesFrame,
    config: TrainConfig,
    registry: OperatorRegistry | None = None,
) -> tuple[AgentBundle, dict]:
    """Run the episodic training loop; returns the trained bundle and a log."""
    registry = registry or default_registry()
    rng = np.random.default_rng(config.seed)
    constraints = miner.mine_all(frame, config.miner)
    env = _Env(frame, constraints, config)

    t0 = time.perf_counter()
    for _ in range(2):
        downstream.evaluate(frame, config.task, TIER_LITE)
    lite_seconds = (time.perf_counter() - t0) / 2.0

    perf_dirty_complex = downstream.evaluate(frame, config.task, TIER_COMPLEX)
    bundle = AgentBundle.fresh(registry, config.hyper, train_config=config.to_dict())
    episodes_log = []

    for _ep in range(config.episodes):
        cur = env.initial
        a_prev = "start"
        history: list[tuple[str, int, bool]] = []
        steps_log = []
        final_pair = None
        finished = False
        for l in range(config.l_max):
            s_high = quality.high_state(cur.rates, a_prev, cur.p_lite, l, config.l_max)
            reads_before = bundle.q_reads
            a_high = agents.select_high(
                bundle, s_high, cur.rates, explore=True, rng=rng, allow_finish=l > 0
            )
            if a_high == "F":
                final_pair = (s_high.key(), "F")
                finished = True
                break
            s_low = quality.LowState(a_high, *cur.bins)
            forbidden = None
            if rewards.stagnation_check(history) and history[-1][0] == a_high:
                forbidden = history[-1][1]  # break the deadlock behaviorally
            a_low = agents.select_low(
                bundle, s_low, a_high, explore=True, rng=rng, forbidden=forbidden
            )
            q_reads = bundle.q_reads - reads_before
            op = registry.list(a_high)[a_low]
            ctx = OperatorContext(constraints, cur.masks.outlier, cur.masks.violation)
            try:
                applied = registry.apply(op, cur.frame, ctx)
            except Exception as exc:  # operator crash degrades to a no-op
                applied = ApplyResult(cur.frame, 0, f"{op.id} failed: {exc}")
            nxt = env.step(cur, applied)
            lite_delta = nxt.p_lite - cur.p_lite
            low_bd = rewards.low_dense(
                cur.frame, nxt.frame, cur.rates, nxt.rates, a_high, lite_delta, config.weights
            )
            # a zero-change step cannot count as substantive improvement, or
            # the smoothness term alone would shield no-ops from stagnation
            improved = (
                low_bd.low_total > IMPROVEMENT_THRESHOLD and applied.cells_changed > 0
            )
            history.append((a_high, a_low, improved))
            stagnated = rewards.stagnation_check(history)
            high_bd = rewards.high_dense(
                low_bd, cur.rates, nxt.rates, 1.0, 1.0, stagnated, config.weights
            )
            # low-level updates are one-step: the category may never be
            # revisited this episode, so bootstrapping within its table
            # would chase a fictitious successor
            agents.update_low(
                bundle, a_high, s_low.key(), a_low, low_bd.low_total,
                None, terminal=True,
            )
            s_high_next = quality.high_state(
                nxt.rates, a_high, nxt.p_lite, l + 1, config.l_max
            )
            # at the budget boundary the only remaining choice is to finish,
            # so the bootstrap runs over {F}; the terminal sparse update below
            # then values that forced finish
            next_actions = (
                ["F"] if l + 1 == config.l_max else _next_high_actions(nxt.rates)
            )
            agents.update_high(
                bundle, s_high.key(), a_high, high_bd.high_total,
                s_high_next.key(), next_actions, terminal=False,
            )
            final_pair = (s_high_next.key(), "F")
            steps_log.append(
                {
                    "cells_changed": applied.cells_changed,
                    "high": a_high,
                    "improved": improved,
                    "low_index": a_low,
                    "op_id": op.id,
                    "p_lite": nxt.p_lite,
                    "post_rates": nxt.rates.to_dict(),
                    "pre_rates": cur.rates.to_dict(),
                    "q_reads": q_reads,
                    "reward": high_bd.to_dict(),
                    "stagnated": stagnated,
                    "warning": applied.warning,
                }
            )
            a_prev = a_high
            cur = nxt
        if cur.frame is frame:
            perf_clean = perf_dirty_complex
        else:
            perf_clean = downstream.evaluate(cur.frame, config.task, TIER_COMPLEX)
        sparse_r = perf_clean - perf_dirty_complex
        if final_pair is not None:
            agents.update_high(bundle, final_pair[0], final_pair[1], sparse_r, None, None, True)
        episodes_log.append(
            {
                "epsilon": bundle.epsilon,
                "finished": finished,
                "pipeline": [s["op_id"] for s in steps_log],
                "sparse": sparse_r,
                "steps": steps_log,
            }
        )
        bundle.decay_epsilon()

    log = {
        "config": config.to_dict(),
        "constraints": constraints.to_dict(),
        "episodes": episodes_log,
        "lite_eval_seconds": lite_seconds,
        "perf_dirty_complex": perf_dirty_complex,
        "version": 1,
    }
    return bundle, log


def infer(
    frame: TimeSeriesFrame,
    bundle: AgentBundle,
    registry: OperatorRegistry | None = None,
    constraints: ConstraintSet | None = None,
    task: TaskSpec | None = None,
) -> tuple[TimeSeriesFrame, CleaningPipeline]:
    """Greedy rollout with exploration off and no updates, capped at l_max."""
    registry = registry or default_registry()
    bundle.align_with_registry(registry)
    if bundle.train_config is None:
        raise DataError("agent bundle carries no training configuration")
    config = TrainConfig.from_dict(bundle.train_config)
    if task is not None:
        config = TrainConfig(
            task, config.episodes, config.l_max, config.seed, config.weights,
            config.miner, config.detector, config.hyper,
        )
    constraints = constraints or miner.mine_all(frame, config.miner)
    env = _Env(frame, constraints, config)
    cur = env.initial
    a_prev = "start"
    steps: list[OperatorDescriptor] = []
    provenance: list[StepProvenance] = []
    history: list[tuple[str, int, bool]] = []
    for l in range(config.l_max):
        s_high = quality.high_state(cur.rates, a_prev, cur.p_lite, l, config.l_max)
        # unlike training episodes, a rollout may finish immediately
        a_high = agents.select_high(bundle, s_high, cur.rates, explore=False)
        if a_high == "F":
            break
        s_low = quality.LowState(a_high, *cur.bins)
        forbidden = None
        if rewards.stagnation_check(history) and history[-1][0] == a_high:
            forbidden = history[-1][1]  # same deadlock breaker as training
        a_low = agents.select_low(
            bundle, s_low, a_high, explore=False, forbidden=forbidden
        )
        op = registry.list(a_high)[a_low]
        ctx = OperatorContext(constraints, cur.masks.outlier, cur.masks.violation)
        try:
            applied = registry.apply(op, cur.frame, ctx)
        except Exception as exc:
            applied = ApplyResult(cur.frame, 0, f"{op.id} failed: {exc}")
        nxt = env.step(cur, applied)
        low_bd = rewards.low_dense(
            cur.frame, nxt.frame, cur.rates, nxt.rates, a_high,
            nxt.p_lite - cur.p_lite, config.weights,
        )
        high_bd = rewards.high_dense(
            low_bd, cur.rates, nxt.rates, 1.0, 1.0, False, config.weights
        )
        history.append((a_high, a_low, applied.cells_changed > 0))
        steps.append(op)
        provenance.append(StepProvenance(cur.rates, nxt.rates, high_bd.to_dict()))
        a_prev = a_high
        cur = nxt
    return cur.frame, CleaningPipeline(tuple(steps), tuple(provenance))


def replay(
    frame: TimeSeriesFrame,
    pipeline: CleaningPipeline,
    registry: OperatorRegistry | None = None,
    constraints: ConstraintSet | None = None,
    miner_config: MinerConfig = MinerConfig(),
    detector_config: DetectorConfig = DetectorConfig(),
) -> TimeSeriesFrame:
    """Re-apply a stored pipeline; bit-identical to the original rollout."""
    registry = registry or default_registry()
    constraints = constraints or miner.mine_all(frame, miner_config)
    cur = frame
    for op in pipeline.steps:
        _, masks = quality.rates(cur, constraints, detector_config)
        ctx = OperatorContext(constraints, masks.outlier, masks.violation)
        try:
            applied = registry.apply(op, cur, ctx)
        except Exception:
            continue
        cur = applied.frame
    return cur


def save_pipeline(pipeline: CleaningPipeline, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pipeline.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_pipeline(path, registry: OperatorRegistry | None = None) -> CleaningPipeline:
    registry = registry or default_registry()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        pipeline = CleaningPipeline.from_dict(doc)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"corrupt pipeline file {path}: {exc}") from exc
    for op in pipeline.steps:
        if op.id not in registry:
            raise DataError(f"unknown operator id {op.id!r} in pipeline")
    return pipeline


def save_log(log: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(log, fh, sort_keys=True, indent=1)
        fh.write("\n")
