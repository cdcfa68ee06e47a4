"""Rolling-window kernels with a compiled core and a pure-numpy fallback.

The compiled extension is preferred when the build produced it; otherwise
the numpy implementation is used transparently. `BACKEND` reports which one
is active.
"""

try:
    from tsscrub.kernels import _ckernels as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built on this platform
    from tsscrub.kernels import _pykernels as _impl

    BACKEND = "python"

rolling_median = _impl.rolling_median
rolling_median_mad = _impl.rolling_median_mad
rolling_mean_std = _impl.rolling_mean_std
trailing_var = _impl.trailing_var

__all__ = [
    "BACKEND",
    "rolling_median",
    "rolling_median_mad",
    "rolling_mean_std",
    "trailing_var",
]
