"""Shared NaN-aware statistics helpers used by mining, detection, and state features."""

from __future__ import annotations

import numpy as np

MAD_SCALE = 1.48  # robust-sigma scaling for median absolute deviation


def finite(x: np.ndarray) -> np.ndarray:
    return x[~np.isnan(x)]


def value_range(x: np.ndarray) -> float:
    v = finite(x)
    if v.size == 0:
        return 0.0
    return float(v.max() - v.min())


def robust_sigma(g: np.ndarray) -> tuple[float, float]:
    """(median, MAD_SCALE * median absolute deviation) of a finite sample."""
    med = float(np.median(g))
    return med, MAD_SCALE * float(np.median(np.abs(g - med)))


def nan_pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation over complete pairs; 0 when undefined."""
    ok = ~np.isnan(a) & ~np.isnan(b)
    if ok.sum() < 3:
        return 0.0
    x, y = a[ok], b[ok]
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))


def acf_mean_filled(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelation for lags 0..max_lag via FFT, gaps filled with the mean.

    Mean-filled cells contribute zero to every lag product, which keeps the
    estimate well defined on gappy series.
    """
    v = x.copy()
    ok = ~np.isnan(v)
    if ok.sum() < 3:
        return np.zeros(max_lag + 1)
    mu = v[ok].mean()
    v = np.where(ok, v - mu, 0.0)
    n = v.size
    var = float(np.dot(v, v))
    if var == 0.0:
        return np.zeros(max_lag + 1)
    size = 1
    while size < 2 * n:
        size *= 2
    f = np.fft.rfft(v, size)
    ac = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    return np.clip(ac / var, -1.0, 1.0)


def dominant_period(x: np.ndarray, min_strength: float = 0.1) -> int | None:
    """Lag in 2..T/2 with the highest autocorrelation, if any is material."""
    max_lag = x.size // 2
    if max_lag < 2:
        return None
    ac = acf_mean_filled(x, max_lag)
    lag = int(np.argmax(ac[2:])) + 2
    if ac[lag] < min_strength:
        return None
    return lag


def sample_skewness(x: np.ndarray) -> float | None:
    """Biased sample skewness of finite values; None when undefined."""
    v = finite(x)
    if v.size < 3:
        return None
    s = v.std()
    if s == 0.0:
        return None
    return float(np.mean(((v - v.mean()) / s) ** 3))


def excess_kurtosis(x: np.ndarray) -> float | None:
    v = finite(x)
    if v.size < 4:
        return None
    s = v.std()
    if s == 0.0:
        return None
    return float(np.mean(((v - v.mean()) / s) ** 4) - 3.0)


def diff_variance_ratio(x: np.ndarray) -> float | None:
    """var(first difference of complete pairs) / var(raw); the stationarity score."""
    v = finite(x)
    if v.size < 3:
        return None
    raw_var = v.var()
    if raw_var == 0.0:
        return None
    ok = ~np.isnan(x)
    pair = ok[1:] & ok[:-1]
    if pair.sum() < 2:
        return None
    d = x[1:][pair] - x[:-1][pair]
    return float(d.var() / raw_var)
