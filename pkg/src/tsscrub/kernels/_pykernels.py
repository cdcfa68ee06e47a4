"""Pure-numpy fallback for the compiled rolling-window kernels.

Same contracts as tsscrub.kernels._ckernels: 1-D float64 input with NaN as
the missing marker, centered odd windows (trailing for trailing_var).
Medians match the compiled backend bit-for-bit; mean/std/var agree to
floating-point roundoff (summation order differs).
"""

import warnings

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _padded_windows(x, window):
    h = window // 2
    pad = np.full(h, np.nan)
    return sliding_window_view(np.concatenate([pad, x, pad]), window)


def _check_window(window):
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")


def rolling_median(x, window):
    """Centered rolling median skipping NaNs; NaN where no valid value."""
    _check_window(window)
    win = _padded_windows(np.ascontiguousarray(x, dtype=np.float64), window)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.nanmedian(win, axis=1)


def rolling_median_mad(x, window):
    """Centered rolling (median, median-absolute-deviation) skipping NaNs."""
    _check_window(window)
    x = np.ascontiguousarray(x, dtype=np.float64)
    win = _padded_windows(x, window)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(win, axis=1)
        mad = np.nanmedian(np.abs(win - med[:, None]), axis=1)
    return med, mad


def rolling_mean_std(x, window):
    """Centered rolling mean and sample std (ddof=1) skipping NaNs."""
    _check_window(window)
    win = _padded_windows(np.ascontiguousarray(x, dtype=np.float64), window)
    valid = ~np.isnan(win)
    n = valid.sum(axis=1)
    total = np.where(valid, win, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(n > 0, total / np.maximum(n, 1), np.nan)
        dev = np.where(valid, win - mean[:, None], 0.0)
        ss = (dev * dev).sum(axis=1)
        std = np.where(n > 1, np.sqrt(ss / np.maximum(n - 1, 1)), np.nan)
    return mean, std


def trailing_var(x, window):
    """Sample variance (ddof=1) of trailing windows; NaN if any cell is NaN."""
    if window < 2:
        raise ValueError("window must be >= 2")
    x = np.ascontiguousarray(x, dtype=np.float64)
    T = x.shape[0]
    out = np.full(T, np.nan)
    if T < window:
        return out
    win = sliding_window_view(x, window)
    clean = ~np.isnan(win).any(axis=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        v = np.var(win, axis=1, ddof=1)
    out[window - 1 :] = np.where(clean, v, np.nan)
    return out
