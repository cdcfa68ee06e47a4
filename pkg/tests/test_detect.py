"""Detector pool, meta features, selection rules, score fusion, thresholding."""

import itertools

import numpy as np
import pytest

from tsscrub import detect
from tsscrub.core import DataError
from tsscrub.detect import (
    DIFF_SPIKE,
    HAMPEL_FLAG,
    IQR_GLOBAL,
    MAD_GLOBAL,
    POOL,
    ROLLING_ZSCORE,
    ZSCORE_GLOBAL,
    DetectorConfig,
    MetaFeatures,
    flag,
    meta_features,
    score,
    select_detectors,
)

from conftest import make_frame


def test_meta_trend_of_pure_ramp():
    frame = make_frame(np.arange(50.0))
    meta = meta_features(frame)
    assert meta.trend_strength == pytest.approx(1.0)


def test_meta_stationarity_of_white_noise():
    # var(diff of iid) = 2 var, checked against a seeded simulation
    rng = np.random.default_rng(0)
    frame = make_frame(rng.normal(0, 1, 4000))
    meta = meta_features(frame)
    assert meta.stationarity_ratio == pytest.approx(2.0, abs=0.2)


def test_meta_seasonality_of_sine():
    t = np.arange(200, dtype=np.float64)
    frame = make_frame(np.sin(2 * np.pi * t / 20))
    meta = meta_features(frame)
    assert meta.seasonality_strength > 0.9


def test_meta_all_missing_errors():
    frame = make_frame(np.full(10, np.nan))
    with pytest.raises(DataError):
        meta_features(frame)


def test_meta_missing_frac():
    x = np.arange(10.0)
    x[:2] = np.nan
    assert meta_features(make_frame(x)).missing_frac == 0.2


def test_select_heavy_tails_first():
    meta = MetaFeatures(0.1, 0.0, 1.0, 0.0, 5.0)
    assert select_detectors(meta, 2) == [MAD_GLOBAL, HAMPEL_FLAG]


def test_select_strong_trend():
    meta = MetaFeatures(0.9, 0.0, 1.0, 0.0, 0.0)
    assert select_detectors(meta, 2) == [ROLLING_ZSCORE, DIFF_SPIKE]


def test_select_default_global_pair():
    meta = MetaFeatures(0.1, 0.0, 1.0, 0.0, 0.0)
    assert select_detectors(meta, 2) == [ZSCORE_GLOBAL, MAD_GLOBAL]


def test_select_clamps_to_pool():
    meta = MetaFeatures(0.0, 0.0, 1.0, 0.0, 0.0)
    got = select_detectors(meta, 100)
    assert len(got) == len(POOL)
    assert set(got) == set(POOL)


def test_score_constant_raw_maps_to_zero():
    frame = make_frame(np.full(20, 3.0))
    fused = score(frame, [ZSCORE_GLOBAL])
    assert (fused == 0.0).all()


def test_score_mean_fusion():
    rng = np.random.default_rng(1)
    frame = make_frame(rng.normal(0, 1, 120))
    a = score(frame, [ZSCORE_GLOBAL])
    b = score(frame, [MAD_GLOBAL])
    ab = score(frame, [ZSCORE_GLOBAL, MAD_GLOBAL])
    np.testing.assert_allclose(ab, (a + b) / 2.0, atol=1e-12)


def test_score_spike_argmax():
    frame = make_frame([0.0, 0.0, 0.0, 100.0, 0.0, 0.0])
    fused = score(frame, [ZSCORE_GLOBAL])
    assert int(np.argmax(fused[:, 0])) == 3


def test_score_fusion_order_invariant():
    rng = np.random.default_rng(2)
    x = rng.normal(0, 1, 150)
    x[40] = 30.0
    frame = make_frame(x)
    dets = [ZSCORE_GLOBAL, MAD_GLOBAL, DIFF_SPIKE]
    ref = score(frame, dets)
    for perm in itertools.permutations(dets):
        np.testing.assert_allclose(score(frame, list(perm)), ref, atol=1e-12)


def test_scores_bounded_and_missing_zero():
    rng = np.random.default_rng(3)
    x = rng.normal(0, 1, 100)
    x[::7] = np.nan
    frame = make_frame(x)
    fused = score(frame, list(POOL))
    assert fused.min() >= 0.0 and fused.max() <= 1.0
    assert (fused[np.isnan(frame.values)] == 0.0).all()


def test_big_spike_attains_max_for_any_subset_with_global_detector():
    rng = np.random.default_rng(4)
    x = rng.normal(0, 1, 200)
    x[77] += 15.0  # >= 10 sigma
    frame = make_frame(x)
    others = [d for d in POOL if d not in (ZSCORE_GLOBAL, MAD_GLOBAL)]
    for anchor in (ZSCORE_GLOBAL, MAD_GLOBAL):
        for r in range(len(others) + 1):
            for combo in itertools.combinations(others, r):
                fused = score(frame, [anchor, *combo])
                assert int(np.argmax(fused[:, 0])) == 77


def test_flag_threshold_rules():
    scores = np.zeros((4, 1))
    assert not flag(scores, 0.8).any()
    scores[2, 0] = 0.95
    mask = flag(scores, 0.8)
    assert mask[2, 0] and mask.sum() == 1
    with pytest.raises(ValueError):
        flag(scores, 0.0)
    with pytest.raises(ValueError):
        DetectorConfig(threshold=1.0)


def test_outlier_mask_end_to_end():
    rng = np.random.default_rng(5)
    x = rng.normal(0, 1, 300)
    x[100] += 20.0
    mask = detect.outlier_mask(make_frame(x))
    assert mask[100, 0]
    assert mask.sum() <= 5
