"""Task proxies: perf formulas, determinism, tier asymmetry."""

import time

import numpy as np
import pytest

from tsscrub import bench, downstream
from tsscrub.core import DataError, TimeSeriesFrame
from tsscrub.downstream import TIER_COMPLEX, TIER_LITE, TaskSpec, delta_perf, evaluate

from conftest import make_frame


def test_perf_formula_boundaries():
    # perfect forecast: NRMSE=0, CC=1 -> (e^0 + 1)/2 = 1
    assert (np.exp(-0.0) + (1.0 + 1) / 2) / 2 == 1.0
    # chance classifier: (0.5 + 0.5)/2 = 0.5
    assert (0.5 + 0.5) / 2 == 0.5
    # silhouette 0, DBI 1 -> (0.5 + 0.5)/2 = 0.5
    assert ((0.0 + 1) / 2 + 1 / (1 + 1.0)) / 2 == 0.5


def test_forecast_near_perfect_on_noiseless_ar():
    t = np.arange(200, dtype=np.float64)
    frame = make_frame(np.sin(2 * np.pi * t / 16))
    spec = TaskSpec("Forecast", window=8)
    perf = evaluate(frame, spec, TIER_LITE)
    assert perf > 0.97


def test_forecast_horizon_validation():
    with pytest.raises(ValueError):
        TaskSpec("Forecast", horizon=0)


def test_forecast_too_short_errors():
    frame = make_frame(np.arange(10.0))
    with pytest.raises(DataError):
        evaluate(frame, TaskSpec("Forecast", window=8), TIER_LITE)


def test_missing_zero_filled_with_warning():
    t = np.arange(120, dtype=np.float64)
    x = np.sin(t / 5)
    x[10] = np.nan
    frame = make_frame(x)
    with pytest.warns(UserWarning, match="zero-filled"):
        evaluate(frame, TaskSpec("Forecast"), TIER_LITE)


def test_evaluate_deterministic():
    frame, spec = bench.make_synthetic("classify-shapes", 3)
    a = evaluate(frame, spec, TIER_COMPLEX)
    b = evaluate(frame, spec, TIER_COMPLEX)
    assert a == b


def test_delta_perf_identity_is_zero():
    frame, spec = bench.make_synthetic("forecast-sine-trend", 1)
    assert delta_perf(frame, frame, spec, TIER_LITE) == 0.0


def test_delta_perf_destructive_cleaning_negative():
    frame, spec = bench.make_synthetic("forecast-sine-trend", 1)
    zeroed = frame.with_values(np.zeros_like(frame.values))
    assert delta_perf(frame, zeroed, spec, TIER_LITE) < 0.0


def test_classify_lite_high_on_clean_corpus():
    frame, spec = bench.make_synthetic("classify-shapes", 0)
    assert evaluate(frame, spec, TIER_LITE) > 0.9


def test_classify_labels_must_align():
    frame, spec = bench.make_synthetic("classify-shapes", 0)
    bad = TaskSpec("Classify", labels=spec.labels[:-1], sample_len=spec.sample_len)
    with pytest.raises(DataError, match="labels count"):
        evaluate(frame, bad, TIER_LITE)


def test_classify_degenerate_split_errors():
    rng = np.random.default_rng(0)
    frame = make_frame(rng.normal(0, 1, (8 * 4, 2)))
    spec = TaskSpec("Classify", labels=(0,) * 7 + (1,), sample_len=4, test_frac=0.9)
    with pytest.raises(DataError, match="degenerate"):
        evaluate(frame, spec, TIER_LITE)


def test_cluster_perf_separates_blobs():
    frame, spec = bench.make_synthetic("cluster-blobs", 0)
    perf = evaluate(frame, spec, TIER_COMPLEX)
    assert perf > 0.6


def test_cluster_needs_k():
    with pytest.raises(ValueError):
        TaskSpec("Cluster", sample_len=8)


def test_task_spec_roundtrip():
    spec = TaskSpec("Classify", labels=(0, 1, 0, 1), sample_len=4, test_frac=0.3, seed=7)
    assert TaskSpec.from_dict(spec.to_dict()) == spec


def test_perf_always_in_unit_interval():
    rng = np.random.default_rng(9)
    frame = make_frame(rng.normal(0, 1, (120, 2)))
    for tier in (TIER_LITE, TIER_COMPLEX):
        p = evaluate(frame, TaskSpec("Forecast"), tier)
        assert 0.0 <= p <= 1.0


def test_lite_at_least_5x_faster_than_complex_on_reference_corpus():
    frame, spec = bench.make_synthetic("forecast-sine-trend", 0)
    evaluate(frame, spec, TIER_LITE)  # warm both paths
    evaluate(frame, spec, TIER_COMPLEX)

    def median_time(tier):
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            for _ in range(10):
                evaluate(frame, spec, tier)
            runs.append(time.perf_counter() - t0)
        return np.median(runs)

    assert median_time(TIER_COMPLEX) >= 5.0 * median_time(TIER_LITE)
