"""Reward arithmetic, component normalization, and the stagnation trigger."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsscrub.core import QualityRates
from tsscrub.rewards import (
    RewardWeights,
    combine_high,
    combine_low,
    high_dense,
    low_dense,
    modification_distance,
    smoothness,
    stagnation_check,
)

from conftest import make_frame

unit = st.floats(0.0, 1.0, allow_nan=False)
signed = st.floats(-1.0, 1.0, allow_nan=False)


def test_low_dense_hand_example():
    w = RewardWeights()
    total = combine_low(0.5, 0.1, 0.3, 0.2, w)
    assert total == pytest.approx(0.2 * 0.5 - 0.2 * 0.1 + 0.2 * 0.3 + 0.4 * 0.2, abs=1e-15)
    assert total == pytest.approx(0.22, abs=1e-12)


def test_high_dense_hand_example():
    w = RewardWeights()
    total = combine_high(0.5, 0.2, 0.1, 0.0, w)
    assert total == pytest.approx(0.4 * 0.5 + 0.5 * 0.2 - 0.1 * 0.1, abs=1e-15)
    assert total == pytest.approx(0.29, abs=1e-12)
    assert combine_high(0.5, 0.2, 0.1, 5.0, w) == pytest.approx(-4.71, abs=1e-12)


def test_noop_gives_structure_only_low_total():
    frame = make_frame(np.sin(np.arange(50.0) / 5))
    q = QualityRates(0.0, 0.1, 0.0)
    bd = low_dense(frame, frame, q, q, "O", 0.0)
    assert bd.distance == 0.0 and bd.local == 0.0 and bd.lite == 0.0
    assert bd.low_total == pytest.approx(0.2 * bd.structure, abs=1e-15)


def test_full_rate_reduction_gives_local_one():
    frame = make_frame(np.arange(20.0))
    bd = low_dense(frame, frame, QualityRates(0.2, 0, 0), QualityRates(0, 0, 0), "M", 0.0)
    assert bd.local == 1.0


def test_lite_delta_clamped():
    frame = make_frame(np.arange(20.0))
    q = QualityRates(0, 0, 0)
    bd = low_dense(frame, frame, q, q, "M", 7.5)
    assert bd.lite == 1.0
    bd = low_dense(frame, frame, q, q, "M", -7.5)
    assert bd.lite == -1.0


def test_high_dense_no_rate_change_noop():
    frame = make_frame(np.arange(20.0))
    q = QualityRates(0.0, 0.1, 0.0)
    low = low_dense(frame, frame, q, q, "O", 0.0)
    bd = high_dense(low, q, q, 0.0, 1.0, False)
    assert bd.quality == 0.0 and bd.cost == 0.0
    assert bd.high_total == pytest.approx(0.4 * low.low_total, abs=1e-15)


def test_penalty_forces_negative_total_within_normalized_ranges():
    rng = np.random.default_rng(0)
    w = RewardWeights()
    for _ in range(200):
        low_total, quality, cost = rng.random(3)
        assert combine_high(low_total, quality, cost, 5.0, w) < 0.0


@given(unit, unit, unit, signed)
@settings(max_examples=200, deadline=None)
def test_low_total_reproduces_equation(structure, distance, local, lite):
    w = RewardWeights()
    total = combine_low(structure, distance, local, lite, w)
    expected = 0.2 * structure - 0.2 * distance + 0.2 * local + 0.4 * lite
    assert abs(total - expected) <= 1e-12


@given(signed, unit, unit)
@settings(max_examples=200, deadline=None)
def test_weight_zero_neutrality(low_total, quality, cost):
    for i in range(3):
        lam = [0.4, 0.5, 0.1]
        lam[i] = 0.0
        w = RewardWeights(lam=tuple(lam))
        base = combine_high(low_total, quality, cost, 0.0, w)
        bumped = [low_total, quality, cost]
        bumped[i] += 0.37
        assert combine_high(*bumped, 0.0, w) == pytest.approx(base, abs=1e-12)


def test_smoothness_prefers_smooth_series():
    t = np.arange(100, dtype=np.float64)
    smooth = make_frame(np.sin(t / 20))
    rng = np.random.default_rng(1)
    jagged = make_frame(np.sin(t / 20) + rng.normal(0, 0.5, 100))
    assert smoothness(smooth) > smoothness(jagged)
    assert 0.0 <= smoothness(jagged) <= 1.0


def test_distance_normalized_by_range():
    a = make_frame(np.linspace(0, 10, 50))
    b = a.with_values(a.values + 1.0)
    d = modification_distance(a, b)
    assert d == pytest.approx(0.1, abs=1e-12)


def test_distance_ignores_missing_cells():
    vals = np.linspace(0, 10, 50)
    vals_b = vals.copy()
    vals_a = vals.copy()
    vals_a[3] = np.nan
    vals_b[3] = 999.0  # fills a missing cell; not a co-numeric change
    d = modification_distance(make_frame(vals_a), make_frame(vals_b))
    assert d == 0.0


def test_stagnation_trigger_rules():
    def h(*entries):
        return [(a, i, imp) for a, i, imp in entries]

    assert stagnation_check(h(("O", 1, False), ("O", 1, False), ("O", 1, False)))
    assert not stagnation_check(h(("O", 1, False), ("O", 1, False)))
    assert not stagnation_check(h(("O", 1, False), ("O", 1, True), ("O", 1, False)))
    assert not stagnation_check(h(("O", 1, False), ("O", 2, False), ("O", 1, False)))
    assert not stagnation_check(h(("M", 1, False), ("O", 1, False), ("O", 1, False)))
    # only the last three entries matter
    assert stagnation_check(
        h(("M", 0, True), ("C", 1, False), ("C", 1, False), ("C", 1, False))
    )


def test_weights_validation_and_roundtrip():
    with pytest.raises(ValueError):
        RewardWeights(mu=(0.2, 0.2, 0.2))
    with pytest.raises(ValueError):
        RewardWeights(lam=(-0.1, 0.5, 0.1))
    w = RewardWeights((0.1, 0.2, 0.3, 0.4), (0.5, 0.4, 0.2))
    assert RewardWeights.from_dict(w.to_dict()) == w
