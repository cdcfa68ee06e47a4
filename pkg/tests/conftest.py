import numpy as np
import pytest

from tsscrub.core import TimeSeriesFrame


@pytest.fixture
def small_frame():
    values = np.array(
        [
            [1.0, 10.0],
            [2.0, 20.0],
            [np.nan, 30.0],
            [4.0, 40.0],
            [5.0, np.nan],
        ]
    )
    return TimeSeriesFrame(np.arange(5), values, ("a", "b"))


def make_frame(values, names=None):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    names = names or tuple(f"v{i}" for i in range(values.shape[1]))
    return TimeSeriesFrame(np.arange(values.shape[0]), values, names)
