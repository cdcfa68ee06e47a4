"""Dense low-level, dense high-level, and sparse rewards.

Low dense combines smoothness, modification distance, targeted-issue-rate
reduction, and the lightweight-model gain; high dense adds overall quality
improvement, a compute-cost toll, and the unnormalized stagnation penalty
which dominates every normalized term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tsscrub.core import CATEGORIES, QualityRates, TimeSeriesFrame
from tsscrub import downstream

EPS = 1e-9
STAGNATION_PENALTY = 5.0
IMPROVEMENT_THRESHOLD = 0.01  # low_total above this counts as progress


@dataclass(frozen=True)
class RewardWeights:
    mu: tuple[float, float, float, float] = (0.2, 0.2, 0.2, 0.4)
    lam: tuple[float, float, float] = (0.4, 0.5, 0.1)

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        if len(self.mu) != 4 or len(self.lam) != 3:
            raise ValueError("mu needs 4 weights, lambda needs 3")
        if any(v < 0 for v in self.mu + self.lam):
            raise ValueError("reward weights must be nonnegative")

    def to_dict(self) -> dict:
        return {"lambda": list(self.lam), "mu": list(self.mu)}

    @staticmethod
    def from_dict(d: dict) -> "RewardWeights":
        return RewardWeights(tuple(d["mu"]), tuple(d["lambda"]))


@dataclass(frozen=True)
class RewardBreakdown:
    structure: float = 0.0
    distance: float = 0.0
    local: float = 0.0
    lite: float = 0.0
    quality: float = 0.0
    cost: float = 0.0
    penalty: float = 0.0
    low_total: float = 0.0
    high_total: float = 0.0

    def to_dict(self) -> dict:
        return {
            "cost": self.cost,
            "distance": self.distance,
            "high_total": self.high_total,
            "lite": self.lite,
            "local": self.local,
            "low_total": self.low_total,
            "penalty": self.penalty,
            "quality": self.quality,
            "structure": self.structure,
        }


def combine_low(
    structure: float, distance: float, local: float, lite: float, weights: RewardWeights
) -> float:
    m1, m2, m3, m4 = weights.mu
    return m1 * structure - m2 * distance + m3 * local + m4 * lite


def combine_high(
    low_total: float,
    quality: float,
    cost: float,
    penalty: float,
    weights: RewardWeights,
) -> float:
    l1, l2, l3 = weights.lam
    return l1 * low_total + l2 * quality - l3 * cost - penalty


def _per_variable_ranges(frame: TimeSeriesFrame) -> np.ndarray:
    vals = frame.values
    with np.errstate(all="ignore"):
        hi = np.nanmax(vals, axis=0)
        lo = np.nanmin(vals, axis=0)
    rng = hi - lo
    return np.where(np.isfinite(rng) & (rng > 0), rng, np.nan)


def smoothness(frame: TimeSeriesFrame) -> float:
    """1 - range-normalized mean absolute second difference, clamped to [0,1]."""
    vals = frame.values
    ranges = _per_variable_ranges(frame)
    jerks = []
    for d in range(frame.n_vars):
        if np.isnan(ranges[d]):
            continue
        x = vals[:, d]
        j = np.abs(x[2:] - 2.0 * x[1:-1] + x[:-2])
        j = j[~np.isnan(j)]
        if j.size:
            jerks.append(float(j.mean()) / ranges[d])
    if not jerks:
        return 1.0
    return float(min(max(1.0 - np.mean(jerks), 0.0), 1.0))


def modification_distance(pre: TimeSeriesFrame, post: TimeSeriesFrame) -> float:
    """Range-normalized RMS change over cells numeric in both frames."""
    ranges = _per_variable_ranges(pre)
    dists = []
    for d in range(pre.n_vars):
        a, b = pre.values[:, d], post.values[:, d]
        ok = ~np.isnan(a) & ~np.isnan(b)
        if not ok.any() or np.isnan(ranges[d]):
            dists.append(0.0)
            continue
        rms = float(np.sqrt(np.mean((a[ok] - b[ok]) ** 2)))
        dists.append(rms / ranges[d])
    if not dists:
        return 0.0
    return float(min(max(np.mean(dists), 0.0), 1.0))


def _rate_of(rates: QualityRates, category: str) -> float:
    return {
        "M": rates.r_missing,
        "O": rates.r_outlier,
        "C": rates.r_violation,
    }[category]


def low_dense(
    pre_frame: TimeSeriesFrame,
    post_frame: TimeSeriesFrame,
    pre_rates: QualityRates,
    post_rates: QualityRates,
    target_issue: str,
    lite_perf_delta: float,
    weights: RewardWeights = RewardWeights(),
) -> RewardBreakdown:
    if target_issue not in CATEGORIES:
        raise ValueError(f"target issue {target_issue!r} is not a category")
    structure = smoothness(post_frame)
    distance = modification_distance(pre_frame, post_frame)
    pre_r = _rate_of(pre_rates, target_issue)
    post_r = _rate_of(post_rates, target_issue)
    local = max(0.0, pre_r - post_r) / max(pre_r, EPS)
    lite = float(min(max(lite_perf_delta, -1.0), 1.0))
    return RewardBreakdown(
        structure=structure,
        distance=distance,
        local=local,
        lite=lite,
        low_total=combine_low(structure, distance, local, lite, weights),
    )


def high_dense(
    low: RewardBreakdown,
    pre_rates: QualityRates,
    post_rates: QualityRates,
    lite_eval_seconds: float,
    cost_scale: float,
    stagnated: bool,
    weights: RewardWeights = RewardWeights(),
) -> RewardBreakdown:
    pre_sum = pre_rates.total()
    post_sum = post_rates.total()
    quality = max(0.0, pre_sum - post_sum) / max(pre_sum, EPS)
    cost = lite_eval_seconds / max(cost_scale, EPS)
    penalty = STAGNATION_PENALTY if stagnated else 0.0
    return RewardBreakdown(
        structure=low.structure,
        distance=low.distance,
        local=low.local,
        lite=low.lite,
        quality=quality,
        cost=cost,
        penalty=penalty,
        low_total=low.low_total,
        high_total=combine_high(low.low_total, quality, cost, penalty, weights),
    )


def sparse(
    dirty: TimeSeriesFrame, cleaned: TimeSeriesFrame, spec: downstream.TaskSpec
) -> float:
    """Terminal reward: complex-tier performance gain of cleaned over dirty."""
    return downstream.delta_perf(dirty, cleaned, spec, downstream.TIER_COMPLEX)


def stagnation_check(history: list[tuple[str, int, bool]]) -> bool:
    """True when the last three steps repeat one (high, low) pair without progress.

    History entries are (high_action, operator_index, improved?).
    """
    if len(history) < 3:
        return False
    tail = history[-3:]
    pair = tail[0][:2]
    return all(h[:2] == pair and not h[2] for h in tail)
