"""Built-in anomaly detector pool, meta-feature-driven top-k selection,
score fusion, and thresholding.

Each detector emits per-cell robust deviation scores capped at Z_CAP so a
single huge spike cannot flatten everything else during min-max
normalization. Fused scores are the plain mean over the selected detectors;
missing cells always score 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tsscrub import kernels, stats
from tsscrub.core import DataError, TimeSeriesFrame

Z_CAP = 6.0


@dataclass(frozen=True)
class DetectorId:
    name: str
    window: int | None = None

    def __post_init__(self):
        if self.window is not None and self.window < 1:
            raise ValueError("detector window must be positive")

    def __str__(self) -> str:
        if self.window is None:
            return self.name
        return f"{self.name}(w={self.window})"


ZSCORE_GLOBAL = DetectorId("ZScoreGlobal")
MAD_GLOBAL = DetectorId("MADGlobal")
IQR_GLOBAL = DetectorId("IQRGlobal")
ROLLING_ZSCORE = DetectorId("RollingZScore", 17)
HAMPEL_FLAG = DetectorId("HampelFlag", 9)
DIFF_SPIKE = DetectorId("DiffSpike")

POOL = (ZSCORE_GLOBAL, MAD_GLOBAL, IQR_GLOBAL, ROLLING_ZSCORE, HAMPEL_FLAG, DIFF_SPIKE)


@dataclass(frozen=True)
class DetectorConfig:
    k: int = 3
    threshold: float = 0.8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0.0 < self.threshold < 1.0):
            raise ValueError("threshold must lie in (0,1)")

    def to_dict(self) -> dict:
        return {"k": self.k, "threshold": self.threshold}

    @staticmethod
    def from_dict(d: dict) -> "DetectorConfig":
        return DetectorConfig(**d)


@dataclass(frozen=True)
class MetaFeatures:
    trend_strength: float
    seasonality_strength: float
    stationarity_ratio: float
    missing_frac: float
    kurtosis: float


def meta_features(frame: TimeSeriesFrame) -> MetaFeatures:
    """Dataset profile used to rank detectors."""
    T, D = frame.values.shape
    t_axis = np.arange(T, dtype=np.float64)
    trends, seasons, ratios, kurts = [], [], [], []
    for d in range(D):
        x = frame.column(d)
        v = stats.finite(x)
        if v.size == 0:
            continue
        trends.append(abs(stats.nan_pearson(x, t_axis)))
        max_lag = T // 2
        if max_lag >= 2:
            ac = stats.acf_mean_filled(x, max_lag)
            seasons.append(float(ac[2:].max()) if max_lag >= 2 else 0.0)
        ratio = stats.diff_variance_ratio(x)
        if ratio is not None:
            ratios.append(ratio)
        k = stats.excess_kurtosis(x)
        if k is not None:
            kurts.append(k)
    if not trends:
        raise DataError("all variables are entirely missing")
    miss = float(np.isnan(frame.values).sum()) / (T * D)
    return MetaFeatures(
        float(np.mean(trends)),
        float(np.mean(seasons)) if seasons else 0.0,
        float(np.mean(ratios)) if ratios else 0.0,
        miss,
        float(np.mean(kurts)) if kurts else 0.0,
    )


def select_detectors(meta: MetaFeatures, k: int) -> list[DetectorId]:
    """Deterministic ranked pool prefix: heavy tails favor robust detectors,
    strong trend favors local ones, otherwise the global pair leads."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked: list[DetectorId] = []
    if meta.kurtosis > 1.0:
        ranked += [MAD_GLOBAL, HAMPEL_FLAG]
    if meta.trend_strength > 0.5:
        ranked += [ROLLING_ZSCORE, DIFF_SPIKE]
    for det in POOL:
        if det not in ranked:
            ranked.append(det)
    return ranked[: min(k, len(POOL))]


def _column_raw_scores(x: np.ndarray, det: DetectorId) -> np.ndarray:
    T = x.shape[0]
    ok = ~np.isnan(x)
    v = x[ok]
    score = np.zeros(T)
    if v.size < 3:
        return score
    if det.name == "ZScoreGlobal":
        sd = v.std()
        if sd > 0:
            score[ok] = np.abs(x[ok] - v.mean()) / sd
    elif det.name == "MADGlobal":
        med, sigma = stats.robust_sigma(v)
        if sigma > 0:
            score[ok] = np.abs(x[ok] - med) / sigma
    elif det.name == "IQRGlobal":
        q1, q3 = np.quantile(v, (0.25, 0.75))
        iqr = q3 - q1
        if iqr > 0:
            lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
            score[ok] = np.maximum(0.0, np.maximum(lo - x[ok], x[ok] - hi)) / iqr
    elif det.name == "RollingZScore":
        mean, std = kernels.rolling_mean_std(x, det.window)
        with np.errstate(invalid="ignore", divide="ignore"):
            z = np.abs(x - mean) / std
        score = np.where(np.isfinite(z), z, 0.0)
    elif det.name == "HampelFlag":
        med, mad = kernels.rolling_median_mad(x, det.window)
        with np.errstate(invalid="ignore", divide="ignore"):
            z = np.abs(x - med) / (stats.MAD_SCALE * mad)
        score = np.where(np.isfinite(z), z, 0.0)
    elif det.name == "DiffSpike":
        fwd = np.full(T, np.nan)
        bwd = np.full(T, np.nan)
        fwd[1:] = np.abs(x[1:] - x[:-1])
        bwd[:-1] = np.abs(x[:-1] - x[1:])
        both = np.fmin(fwd, bwd)  # fmin ignores NaN sides at the edges
        d = fwd[1:]
        d = d[~np.isnan(d)]
        if d.size >= 3:
            _, sigma = stats.robust_sigma(d)
            if sigma > 0:
                score = np.where(np.isnan(both), 0.0, both / sigma)
    else:
        raise ValueError(f"unknown detector {det.name!r}")
    return np.minimum(score, Z_CAP)


def score(frame: TimeSeriesFrame, detectors: list[DetectorId]) -> np.ndarray:
    """Fused per-cell scores in [0,1]; missing cells score 0."""
    if not detectors:
        raise ValueError("detector list must be nonempty")
    T, D = frame.values.shape
    present = ~np.isnan(frame.values)
    fused = np.zeros((T, D))
    for det in detectors:
        raw = np.zeros((T, D))
        for d in range(D):
            raw[:, d] = _column_raw_scores(frame.column(d), det)
        raw[~present] = 0.0
        vals = raw[present]
        if vals.size:
            lo, hi = vals.min(), vals.max()
            if hi > lo:
                norm = (raw - lo) / (hi - lo)
            else:
                norm = np.zeros_like(raw)
        else:
            norm = np.zeros_like(raw)
        norm[~present] = 0.0
        fused += norm
    fused /= len(detectors)
    fused[~present] = 0.0
    return fused


def flag(scores: np.ndarray, threshold: float = 0.8) -> np.ndarray:
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0,1)")
    return scores > threshold


def outlier_mask(frame: TimeSeriesFrame, config: DetectorConfig = DetectorConfig()) -> np.ndarray:
    """meta_features -> select -> score -> flag, the standard detection path."""
    meta = meta_features(frame)
    dets = select_detectors(meta, config.k)
    return flag(score(frame, dets), config.threshold)
