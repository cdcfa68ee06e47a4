"""Benchmark harness: seeded corruption injection with a ground-truth ledger,
repair metrics over the corrupted cells, a random-sampling pipeline baseline,
and the synthetic corpora used by the experiment suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from tsscrub import downstream, miner, quality
from tsscrub.core import CleaningPipeline, DataError, TimeSeriesFrame
from tsscrub.detect import DetectorConfig
from tsscrub.downstream import TIER_COMPLEX, TaskSpec
from tsscrub.ingest import RawFrame
from tsscrub.miner import MinerConfig
from tsscrub.operators import ApplyResult, OperatorContext, OperatorRegistry, default_registry

EPS = 1e-12


@dataclass(frozen=True)
class InjectionSpec:
    duplicate_rate: float = 0.05
    missing_rate: float = 0.05
    point_outlier_rate: float = 0.05
    segment_outlier_rate: float = 0.05
    segment_len: tuple[int, int] = (3, 8)
    violation_rate: float = 0.05
    noise_sigma: float = 0.0
    seed: int = 0
    affected_frac: float = 1.0

    def __post_init__(self):
        for name in (
            "duplicate_rate",
            "missing_rate",
            "point_outlier_rate",
            "segment_outlier_rate",
            "violation_rate",
            "affected_frac",
        ):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0,1]")
        lo, hi = self.segment_len
        if lo < 2 or hi < lo:
            raise ValueError("segment length range must satisfy 2 <= lo <= hi")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "affected_frac": self.affected_frac,
            "duplicate_rate": self.duplicate_rate,
            "missing_rate": self.missing_rate,
            "noise_sigma": self.noise_sigma,
            "point_outlier_rate": self.point_outlier_rate,
            "seed": self.seed,
            "segment_len": list(self.segment_len),
            "segment_outlier_rate": self.segment_outlier_rate,
            "violation_rate": self.violation_rate,
        }

    @staticmethod
    def from_dict(d: dict) -> "InjectionSpec":
        d = dict(d)
        if "segment_len" in d:
            d["segment_len"] = tuple(d["segment_len"])
        return InjectionSpec(**d)


@dataclass(frozen=True)
class GroundTruthLedger:
    clean: TimeSeriesFrame
    missing: np.ndarray
    point_outlier: np.ndarray
    segment_outlier: np.ndarray
    violation: np.ndarray
    duplicate_rows: tuple[int, ...] = ()

    def error_mask(self) -> np.ndarray:
        return self.missing | self.point_outlier | self.segment_outlier | self.violation

    def to_dict(self) -> dict:
        def cells(mask):
            return [[int(t), int(d)] for t, d in zip(*np.nonzero(mask))]

        return {
            "clean": {
                "timestamps": [int(t) for t in self.clean.timestamps],
                "values": [
                    [None if np.isnan(v) else float(v) for v in row]
                    for row in self.clean.values
                ],
                "variable_names": list(self.clean.variable_names),
            },
            "duplicate_rows": list(self.duplicate_rows),
            "masks": {
                "missing": cells(self.missing),
                "point_outlier": cells(self.point_outlier),
                "segment_outlier": cells(self.segment_outlier),
                "violation": cells(self.violation),
            },
            "version": 1,
        }

    @staticmethod
    def from_dict(d: dict) -> "GroundTruthLedger":
        c = d["clean"]
        values = np.array(
            [[np.nan if v is None else v for v in row] for row in c["values"]]
        )
        clean = TimeSeriesFrame(
            np.asarray(c["timestamps"], dtype=np.int64), values, tuple(c["variable_names"])
        )
        shape = values.shape

        def mask(cells):
            m = np.zeros(shape, dtype=bool)
            for t, dd in cells:
                m[t, dd] = True
            return m

        return GroundTruthLedger(
            clean,
            mask(d["masks"]["missing"]),
            mask(d["masks"]["point_outlier"]),
            mask(d["masks"]["segment_outlier"]),
            mask(d["masks"]["violation"]),
            tuple(d.get("duplicate_rows", ())),
        )


def save_ledger(ledger: GroundTruthLedger, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ledger.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_ledger(path) -> GroundTruthLedger:
    try:
        with open(path, encoding="utf-8") as fh:
            return GroundTruthLedger.from_dict(json.load(fh))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"corrupt ledger file {path}: {exc}") from exc


def _pick_cells(rng, available: np.ndarray, count: int) -> np.ndarray:
    flat = np.nonzero(available.ravel())[0]
    if count > flat.size:
        raise DataError("over-corruption: not enough cells left to corrupt")
    chosen = rng.choice(flat, size=count, replace=False)
    return chosen


def inject(clean: TimeSeriesFrame, spec: InjectionSpec) -> tuple[RawFrame, GroundTruthLedger]:
    """Corrupt a clean frame; all randomness comes from spec.seed."""
    T, D = clean.values.shape
    total = T * D
    cell_rates = (
        spec.missing_rate
        + spec.point_outlier_rate
        + spec.segment_outlier_rate
        + spec.violation_rate
    )
    if cell_rates > 0.9:
        raise DataError("over-corruption: per-cell rates sum above 0.9")
    rng = np.random.default_rng(spec.seed)
    vals = clean.values.copy()
    sigmas = np.maximum(vals.std(axis=0), EPS)
    n_aff = max(1, int(round(spec.affected_frac * D)))
    affected = np.sort(rng.choice(D, size=n_aff, replace=False))
    available = np.zeros((T, D), dtype=bool)
    available[:, affected] = True
    locked = np.zeros((T, D), dtype=bool)  # violation anchors stay pristine

    masks = {
        k: np.zeros((T, D), dtype=bool)
        for k in ("missing", "point_outlier", "segment_outlier", "violation")
    }

    # segment outliers: contiguous constant offsets
    n_segment = int(round(spec.segment_outlier_rate * total))
    placed = 0
    attempts = 0
    while placed < n_segment and attempts < 200 * max(n_segment, 1):
        attempts += 1
        d = int(affected[rng.integers(n_aff)])
        length = int(rng.integers(spec.segment_len[0], spec.segment_len[1] + 1))
        length = min(length, n_segment - placed)
        if length < 1 or T - length - 1 < 1:
            continue
        start = int(rng.integers(1, T - length))
        run = slice(start, start + length)
        if not available[run, d].all():
            continue
        offset = float(rng.choice((-1.0, 1.0)) * rng.uniform(3.0, 6.0) * sigmas[d])
        vals[run, d] += offset
        masks["segment_outlier"][run, d] = True
        available[run, d] = False
        placed += length
    if placed < n_segment:
        raise DataError("over-corruption: could not place requested segment outliers")

    # constraint violations: break clean-mined speed bounds by 2-4x their width
    n_violation = int(round(spec.violation_rate * total))
    if n_violation:
        speed = {
            c.variable: c for c in miner.mine_temporal(clean, "Speed", MinerConfig())
        }
        candidates = available.copy()
        candidates[0, :] = False
        for d in range(D):
            if d not in speed:
                candidates[:, d] = False
        flat = np.nonzero(candidates.ravel())[0]
        if flat.size < n_violation:
            raise DataError("over-corruption: not enough violation slots")
        chosen = rng.choice(flat, size=n_violation, replace=False)
        for idx in chosen:
            t, d = divmod(int(idx), D)
            c = speed[d]
            width = max(c.g_max - c.g_min, EPS)
            factor = float(rng.uniform(2.0, 4.0))
            if rng.random() < 0.5:
                vals[t, d] = clean.values[t - 1, d] + c.g_max + factor * width
            else:
                vals[t, d] = clean.values[t - 1, d] + c.g_min - factor * width
            masks["violation"][t, d] = True
            available[t, d] = False
            if available[t - 1, d]:
                locked[t - 1, d] = True  # keep the anchor numeric

    # point outliers: +-(5-10) sigma spikes
    n_point = int(round(spec.point_outlier_rate * total))
    if n_point:
        chosen = _pick_cells(rng, available & ~locked, n_point)
        for idx in chosen:
            t, d = divmod(int(idx), D)
            spike = float(rng.choice((-1.0, 1.0)) * rng.uniform(5.0, 10.0) * sigmas[d])
            vals[t, d] += spike
            masks["point_outlier"][t, d] = True
            available[t, d] = False

    # additive noise overlays every cell
    if spec.noise_sigma > 0:
        vals += rng.normal(0.0, 1.0, size=vals.shape) * (spec.noise_sigma * sigmas)

    # missing cells are blanked last so the values above stay observable
    n_missing = int(round(spec.missing_rate * total))
    if n_missing:
        chosen = _pick_cells(rng, available & ~locked, n_missing)
        for idx in chosen:
            t, d = divmod(int(idx), D)
            vals[t, d] = np.nan
            masks["missing"][t, d] = True
            available[t, d] = False

    # duplicated rows repeat the (already corrupted) observation
    n_dup = int(round(spec.duplicate_rate * T))
    dup_rows = np.sort(rng.choice(T, size=n_dup, replace=False)) if n_dup else np.array([], dtype=int)
    ts_out, val_rows = [], []
    dup_ts = []
    for t in range(T):
        ts_out.append(int(clean.timestamps[t]))
        val_rows.append(vals[t])
        if t in set(dup_rows.tolist()):
            ts_out.append(int(clean.timestamps[t]))
            val_rows.append(vals[t].copy())
            dup_ts.append(int(clean.timestamps[t]))

    raw = RawFrame(np.asarray(ts_out, dtype=np.int64), np.asarray(val_rows), clean.variable_names)
    ledger = GroundTruthLedger(
        clean,
        masks["missing"],
        masks["point_outlier"],
        masks["segment_outlier"],
        masks["violation"],
        tuple(dup_ts),
    )
    return raw, ledger


@dataclass(frozen=True)
class UpstreamMetrics:
    f1: float | None
    nmse: float | None
    rra: float | None
    no_errors: bool = False


def upstream_metrics(
    dirty: TimeSeriesFrame,
    cleaned: TimeSeriesFrame,
    ledger: GroundTruthLedger,
    flags: quality.RateMasks,
) -> UpstreamMetrics:
    """Detection F1 plus NMSE/RRA over the corrupted cells."""
    actual = ledger.error_mask()
    if not actual.any():
        return UpstreamMetrics(None, None, None, no_errors=True)
    predicted = flags.missing | flags.outlier | flags.violation
    tp = float((predicted & actual).sum())
    prec = tp / max(float(predicted.sum()), EPS)
    rec = tp / float(actual.sum())
    f1 = 0.0 if (prec + rec) == 0 else 2.0 * prec * rec / (prec + rec)

    star = ledger.clean.values[actual]
    dirty_v = dirty.values[actual]
    clean_v = cleaned.values[actual]
    clean_v = np.where(np.isnan(clean_v), 0.0, clean_v)
    dirty_err = np.where(np.isnan(dirty_v), np.abs(star), np.abs(dirty_v - star))
    clean_err = np.abs(clean_v - star)
    nmse = float((clean_err**2).sum() / max((star**2).sum(), EPS))
    rra = 1.0 - clean_err.sum() / max(dirty_err.sum(), EPS)
    return UpstreamMetrics(float(f1), nmse, float(min(max(rra, 0.0), 1.0)))


@dataclass(frozen=True)
class SamplingResult:
    best_pipeline: CleaningPipeline
    best_reward: float
    rewards: tuple[float, ...]

    def median_reward(self) -> float:
        return float(np.median(self.rewards))


def apply_sequence(
    frame: TimeSeriesFrame,
    ops,
    registry: OperatorRegistry,
    constraints,
    detector_config: DetectorConfig = DetectorConfig(),
) -> TimeSeriesFrame:
    """Apply operators left to right, recomputing flags before each step."""
    cur = frame
    for op in ops:
        _, masks = quality.rates(cur, constraints, detector_config)
        ctx = OperatorContext(constraints, masks.outlier, masks.violation)
        try:
            applied = registry.apply(op, cur, ctx)
        except Exception:
            applied = ApplyResult(cur, 0)
        cur = applied.frame
    return cur


def sampling_baseline(
    dirty: TimeSeriesFrame,
    l_max: int,
    seed: int,
    trials: int,
    task: TaskSpec,
    registry: OperatorRegistry | None = None,
    miner_config: MinerConfig = MinerConfig(),
    detector_config: DetectorConfig = DetectorConfig(),
) -> SamplingResult:
    """Uniformly random pipelines; returns the best by complex-tier gain."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    registry = registry or default_registry()
    all_ops = registry.list("M") + registry.list("O") + registry.list("C")
    rng = np.random.default_rng(seed)
    constraints = miner.mine_all(dirty, miner_config)
    perf_dirty = downstream.evaluate(dirty, task, TIER_COMPLEX)
    best_ops, best_reward, rewards_seen = (), -np.inf, []
    for _ in range(trials):
        length = int(rng.integers(1, l_max + 1))
        ops = tuple(all_ops[int(i)] for i in rng.integers(0, len(all_ops), size=length))
        result = apply_sequence(dirty, ops, registry, constraints, detector_config)
        reward = downstream.evaluate(result, task, TIER_COMPLEX) - perf_dirty
        rewards_seen.append(reward)
        if reward > best_reward:
            best_reward, best_ops = reward, ops
    return SamplingResult(CleaningPipeline(best_ops), float(best_reward), tuple(rewards_seen))


CORPUS_IDS = ("forecast-sine-trend", "classify-shapes", "cluster-blobs")


def make_synthetic(corpus_id: str, seed: int = 0) -> tuple[TimeSeriesFrame, TaskSpec]:
    """Clean desk-scale corpora with a known structure per task."""
    rng = np.random.default_rng(seed)
    if corpus_id == "forecast-sine-trend":
        T = 512
        t = np.arange(T, dtype=np.float64)
        phases = rng.uniform(0, 2 * np.pi, size=3)
        v0 = np.sin(2 * np.pi * t / 48 + phases[0]) + 0.002 * t + rng.normal(0, 0.02, T)
        v1 = 0.8 * np.sin(2 * np.pi * t / 32 + phases[1]) + 0.001 * t + rng.normal(0, 0.02, T)
        v2 = 2.0 * v1 + 1.0 + rng.normal(0, 0.01, T)
        v3 = 1.2 * np.cos(2 * np.pi * t / 64 + phases[2]) + rng.normal(0, 0.02, T)
        frame = TimeSeriesFrame(
            np.arange(T, dtype=np.int64),
            np.column_stack([v0, v1, v2, v3]),
            ("var0", "var1", "var2", "var3"),
        )
        return frame, TaskSpec("Forecast", horizon=1, window=8, test_frac=0.25, seed=seed)
    if corpus_id == "classify-shapes":
        # wide within-class amplitude/phase/frequency jitter keeps the task
        # solvable but leaves corruption visible in downstream performance
        n_per, L, freqs = 40, 64, (1.0, 2.0, 4.0)
        t = np.arange(L, dtype=np.float64)
        rows, labels = [], []
        for label, f in enumerate(freqs):
            for _ in range(n_per):
                phase = rng.uniform(-1.2, 1.2)
                amp = rng.uniform(0.5, 1.5)
                fi = f * (1.0 + rng.uniform(-0.12, 0.12))
                a = amp * np.sin(2 * np.pi * fi * t / L + phase) + rng.normal(0, 0.35, L)
                b = 0.8 * amp * np.cos(2 * np.pi * fi * t / L + phase) + rng.normal(0, 0.35, L)
                rows.append(np.column_stack([a, b]))
                labels.append(label)
        values = np.vstack(rows)
        frame = TimeSeriesFrame(
            np.arange(values.shape[0], dtype=np.int64), values, ("chan0", "chan1")
        )
        return frame, TaskSpec(
            "Classify", labels=tuple(labels), sample_len=L, test_frac=0.25, seed=seed
        )
    if corpus_id == "cluster-blobs":
        # groups differ in level/amplitude (easy for summary features) and in
        # period with near-aligned phases (survives per-sample z-normalization)
        n_per, L = 30, 64
        t = np.arange(L, dtype=np.float64)
        levels, amps, periods = (-2.0, 0.0, 2.0), (0.5, 1.0, 1.5), (16.0, 32.0, 8.0)
        group_phase = (0.0, 2.0, 4.0)
        rows = []
        for g in range(3):
            for _ in range(n_per):
                phase = group_phase[g] + rng.uniform(-0.3, 0.3)
                a = levels[g] + amps[g] * np.sin(2 * np.pi * t / periods[g] + phase)
                a = a + rng.normal(0, 0.1, L)
                b = levels[g] * 0.5 + amps[g] * np.cos(2 * np.pi * t / periods[g] + phase)
                b = b + rng.normal(0, 0.1, L)
                rows.append(np.column_stack([a, b]))
        values = np.vstack(rows)
        frame = TimeSeriesFrame(
            np.arange(values.shape[0], dtype=np.int64), values, ("chan0", "chan1")
        )
        return frame, TaskSpec("Cluster", n_clusters=3, sample_len=L, seed=seed)
    raise DataError(f"unknown corpus id {corpus_id!r}")
