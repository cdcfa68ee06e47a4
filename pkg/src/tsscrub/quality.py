"""Quality rates and the discretized agent state features.

Rates are exact cell-count fractions over T*D. Continuous state features are
binned into 5 fixed, dataset-agnostic bins so Q-tables stay small and
transfer across datasets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tsscrub import detect, miner, stats
from tsscrub.core import CATEGORIES, DataError, QualityRates, TimeSeriesFrame
from tsscrub.detect import DetectorConfig

SKEW_CUTS = (-1.5, -0.5, 0.5, 1.5)
STATIONARITY_CUTS = (0.5, 1.0, 1.5, 2.5)
VARIANCE_SPAN = 0.25  # normalized variance binned uniformly on [0, 0.25]
N_BINS = 5


@dataclass(frozen=True)
class RateMasks:
    missing: np.ndarray
    outlier: np.ndarray
    violation: np.ndarray


@dataclass(frozen=True)
class HighState:
    i_dom: str  # dominant issue, one of CATEGORIES
    a_prev: str  # previous action or "start"
    p_lite_bin: int
    l_bin: int

    def key(self) -> str:
        return f"{self.i_dom}|{self.a_prev}|{self.p_lite_bin}|{self.l_bin}"


@dataclass(frozen=True)
class LowState:
    g_ind: str  # conditioning high-level action
    skew_bin: int
    sparsity_bin: int
    variance_bin: int
    stationarity_bin: int

    def key(self) -> str:
        return (
            f"{self.g_ind}|{self.skew_bin}|{self.sparsity_bin}"
            f"|{self.variance_bin}|{self.stationarity_bin}"
        )


def rates(
    frame: TimeSeriesFrame,
    constraints,
    detector_config: DetectorConfig = DetectorConfig(),
) -> tuple[QualityRates, RateMasks]:
    missing = frame.missing_mask
    outlier = detect.outlier_mask(frame, detector_config)
    violation, _ = miner.check_violations(frame, constraints)
    return (
        QualityRates.from_masks(missing, outlier, violation),
        RateMasks(missing, outlier, violation),
    )


def _uniform_bin(x: float, span: float = 1.0) -> int:
    return min(int(N_BINS * max(x, 0.0) / span), N_BINS - 1)


def _cut_bin(x: float, cuts) -> int:
    b = 0
    for c in cuts:
        if x >= c:
            b += 1
    return b


def high_state(
    q: QualityRates, a_prev: str, p_lite: float, step: int, l_max: int
) -> HighState:
    triple = (q.r_missing, q.r_outlier, q.r_violation)
    # ties resolve in imputation-first priority order
    i_dom = CATEGORIES[int(np.argmax(triple))]
    return HighState(
        i_dom,
        a_prev,
        _uniform_bin(p_lite),
        _uniform_bin(step / l_max),
    )


def feature_bins(frame: TimeSeriesFrame) -> tuple[int, int, int, int]:
    """Category-independent (skew, sparsity, variance, stationarity) bins."""
    skews, variances, ratios = [], [], []
    for d in range(frame.n_vars):
        x = frame.column(d)
        sk = stats.sample_skewness(x)
        if sk is not None:
            skews.append(sk)
        v = stats.finite(x)
        if v.size:
            rng = v.max() - v.min()
            variances.append(float(v.var() / rng**2) if rng > 0 else 0.0)
        ratio = stats.diff_variance_ratio(x)
        if ratio is not None:
            ratios.append(ratio)
    if not variances:
        raise DataError("all variables are entirely missing")
    sparsity = float(np.isnan(frame.values).sum()) / frame.values.size
    return (
        _cut_bin(float(np.mean(skews)) if skews else 0.0, SKEW_CUTS),
        _uniform_bin(sparsity),
        _uniform_bin(float(np.mean(variances)), VARIANCE_SPAN),
        _cut_bin(float(np.mean(ratios)) if ratios else 0.0, STATIONARITY_CUTS),
    )


def low_state(frame: TimeSeriesFrame, high_action: str) -> LowState:
    if high_action not in CATEGORIES:
        raise ValueError(f"high action {high_action!r} is not a cleaning category")
    return LowState(high_action, *feature_bins(frame))
