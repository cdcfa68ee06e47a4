# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rolling-window kernels for per-step quality scoring.

All functions take a 1-D float64 array where NaN marks a missing cell and
work on centered windows of odd length (trailing for trailing_var). They are
drop-in equivalents of tsscrub.kernels._pykernels.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef double _median_of(double* buf, Py_ssize_t n) noexcept nogil:
    # insertion sort; windows are tiny (<= a few dozen)
    cdef Py_ssize_t i, j
    cdef double key
    for i in range(1, n):
        key = buf[i]
        j = i - 1
        while j >= 0 and buf[j] > key:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = key
    if n % 2 == 1:
        return buf[n // 2]
    return (buf[n // 2 - 1] + buf[n // 2]) / 2.0


def rolling_median(cnp.ndarray[cnp.float64_t, ndim=1] x, int window):
    """Centered rolling median skipping NaNs; NaN where no valid value."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    cdef Py_ssize_t t, j, n, T = x.shape[0]
    cdef int h = window // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(T, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(window, dtype=np.float64)
    cdef double v
    cdef Py_ssize_t lo, hi
    for t in range(T):
        lo = t - h
        if lo < 0:
            lo = 0
        hi = t + h + 1
        if hi > T:
            hi = T
        n = 0
        for j in range(lo, hi):
            v = x[j]
            if v == v:
                buf[n] = v
                n += 1
        out[t] = _median_of(&buf[0], n) if n > 0 else np.nan
    return out


def rolling_median_mad(cnp.ndarray[cnp.float64_t, ndim=1] x, int window):
    """Centered rolling (median, median-absolute-deviation) skipping NaNs."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    cdef Py_ssize_t t, j, n, T = x.shape[0]
    cdef int h = window // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] med = np.empty(T, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mad = np.empty(T, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(window, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dev = np.empty(window, dtype=np.float64)
    cdef double v, m
    cdef Py_ssize_t lo, hi
    for t in range(T):
        lo = t - h
        if lo < 0:
            lo = 0
        hi = t + h + 1
        if hi > T:
            hi = T
        n = 0
        for j in range(lo, hi):
            v = x[j]
            if v == v:
                buf[n] = v
                n += 1
        if n == 0:
            med[t] = np.nan
            mad[t] = np.nan
            continue
        m = _median_of(&buf[0], n)
        med[t] = m
        for j in range(n):
            dev[j] = buf[j] - m if buf[j] >= m else m - buf[j]
        mad[t] = _median_of(&dev[0], n)
    return med, mad


def rolling_mean_std(cnp.ndarray[cnp.float64_t, ndim=1] x, int window):
    """Centered rolling mean and sample std (ddof=1) skipping NaNs.

    Mean is NaN where the window holds no valid value; std is NaN where it
    holds fewer than two.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    cdef Py_ssize_t t, j, n, T = x.shape[0]
    cdef int h = window // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mean = np.empty(T, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] std = np.empty(T, dtype=np.float64)
    cdef double v, s, m, acc, d
    cdef Py_ssize_t lo, hi
    for t in range(T):
        lo = t - h
        if lo < 0:
            lo = 0
        hi = t + h + 1
        if hi > T:
            hi = T
        n = 0
        s = 0.0
        for j in range(lo, hi):
            v = x[j]
            if v == v:
                s += v
                n += 1
        if n == 0:
            mean[t] = np.nan
            std[t] = np.nan
            continue
        m = s / n
        mean[t] = m
        if n < 2:
            std[t] = np.nan
            continue
        acc = 0.0
        for j in range(lo, hi):
            v = x[j]
            if v == v:
                d = v - m
                acc += d * d
        std[t] = (acc / (n - 1)) ** 0.5
    return mean, std


def trailing_var(cnp.ndarray[cnp.float64_t, ndim=1] x, int window):
    """Sample variance (ddof=1) of the trailing window ending at each index.

    NaN for indices before the first full window and for any window that
    touches a NaN.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    cdef Py_ssize_t t, j, T = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(T, np.nan, dtype=np.float64)
    cdef double v, s, m, acc, d
    cdef bint bad
    for t in range(window - 1, T):
        s = 0.0
        bad = False
        for j in range(t - window + 1, t + 1):
            v = x[j]
            if v != v:
                bad = True
                break
            s += v
        if bad:
            continue
        m = s / window
        acc = 0.0
        for j in range(t - window + 1, t + 1):
            d = x[j] - m
            acc += d * d
        out[t] = acc / (window - 1)
    return out
