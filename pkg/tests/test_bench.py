"""Corruption injection, ledger bookkeeping, repair metrics, sampling baseline."""

import itertools
import warnings

import numpy as np
import pytest

from tsscrub import bench, downstream, miner, quality
from tsscrub.bench import (
    GroundTruthLedger,
    InjectionSpec,
    UpstreamMetrics,
    apply_sequence,
    inject,
    make_synthetic,
    sampling_baseline,
    upstream_metrics,
)
from tsscrub.core import DataError, TimeSeriesFrame
from tsscrub.ingest import preprocess
from tsscrub.operators import toy_registry
from tsscrub.quality import RateMasks

from conftest import make_frame

warnings.filterwarnings("ignore", message=".*zero-filled.*")


@pytest.fixture(scope="module")
def clean_forecast():
    frame, task = make_synthetic("forecast-sine-trend", 0)
    return frame, task


def test_inject_identity_when_all_rates_zero(clean_forecast):
    clean, _ = clean_forecast
    spec = InjectionSpec(
        duplicate_rate=0, missing_rate=0, point_outlier_rate=0,
        segment_outlier_rate=0, violation_rate=0, noise_sigma=0, seed=0,
    )
    raw, ledger = inject(clean, spec)
    np.testing.assert_array_equal(raw.values, clean.values)
    assert not ledger.error_mask().any()
    assert ledger.duplicate_rows == ()


def test_inject_exact_missing_count():
    rng = np.random.default_rng(0)
    clean = make_frame(rng.normal(0, 1, (10, 2)))
    spec = InjectionSpec(
        duplicate_rate=0, missing_rate=0.1, point_outlier_rate=0,
        segment_outlier_rate=0, violation_rate=0, seed=1,
    )
    raw, ledger = inject(clean, spec)
    assert np.isnan(raw.values).sum() == 2  # exactly 10% of 20 cells
    assert ledger.missing.sum() == 2


def test_inject_deterministic(clean_forecast):
    clean, _ = clean_forecast
    spec = InjectionSpec(seed=5)
    a_raw, a_led = inject(clean, spec)
    b_raw, b_led = inject(clean, spec)
    np.testing.assert_array_equal(a_raw.values, b_raw.values)
    np.testing.assert_array_equal(a_led.error_mask(), b_led.error_mask())


def test_inject_rate_accuracy_within_one_cell(clean_forecast):
    clean, _ = clean_forecast
    total = clean.values.size
    spec = InjectionSpec(seed=3)
    _, ledger = inject(clean, spec)
    for mask, rate in (
        (ledger.missing, spec.missing_rate),
        (ledger.point_outlier, spec.point_outlier_rate),
        (ledger.segment_outlier, spec.segment_outlier_rate),
        (ledger.violation, spec.violation_rate),
    ):
        assert abs(mask.sum() / total - rate) <= 1.0 / total


def test_inject_masks_disjoint_and_complete(clean_forecast):
    clean, _ = clean_forecast
    spec = InjectionSpec(seed=4, noise_sigma=0.0, duplicate_rate=0.0)
    raw, ledger = inject(clean, spec)
    masks = [ledger.missing, ledger.point_outlier, ledger.segment_outlier, ledger.violation]
    stacked = np.stack(masks).astype(int).sum(axis=0)
    assert stacked.max() <= 1  # disjoint
    dirty = preprocess(raw)
    differs = ~(
        np.isclose(dirty.values, clean.values)
        | (np.isnan(dirty.values) & np.isnan(clean.values))
    )
    np.testing.assert_array_equal(differs, ledger.error_mask())


def test_inject_duplicates_removed_by_preprocess(clean_forecast):
    clean, _ = clean_forecast
    spec = InjectionSpec(seed=6)
    raw, ledger = inject(clean, spec)
    assert len(raw.timestamps) == clean.n_rows + len(ledger.duplicate_rows)
    dirty = preprocess(raw)
    assert dirty.n_rows == clean.n_rows
    np.testing.assert_array_equal(dirty.timestamps, clean.timestamps)


def test_inject_over_corruption_rejected(clean_forecast):
    clean, _ = clean_forecast
    with pytest.raises(DataError, match="over-corruption"):
        inject(clean, InjectionSpec(missing_rate=0.5, point_outlier_rate=0.5))


def test_inject_violations_break_clean_bounds(clean_forecast):
    clean, _ = clean_forecast
    spec = InjectionSpec(
        seed=7, missing_rate=0, point_outlier_rate=0, segment_outlier_rate=0,
        duplicate_rate=0, violation_rate=0.05,
    )
    raw, ledger = inject(clean, spec)
    speed = {c.variable: c for c in miner.mine_temporal(clean, "Speed")}
    dirty = preprocess(raw)
    rows, cols = np.nonzero(ledger.violation)
    for t, d in zip(rows, cols):
        g = dirty.values[t, d] - clean.values[t - 1, d]
        c = speed[d]
        assert g < c.g_min or g > c.g_max


def test_ledger_roundtrip(tmp_path, clean_forecast):
    clean, _ = clean_forecast
    _, ledger = inject(clean, InjectionSpec(seed=8))
    path = tmp_path / "ledger.json"
    bench.save_ledger(ledger, path)
    back = bench.load_ledger(path)
    assert back.clean.equals(ledger.clean)
    np.testing.assert_array_equal(back.error_mask(), ledger.error_mask())
    assert back.duplicate_rows == ledger.duplicate_rows


def _single_cell_setup():
    clean = make_frame(np.full(4, 10.0))
    dirty_vals = clean.values.copy()
    dirty_vals[2, 0] = 20.0
    dirty = clean.with_values(dirty_vals)
    masks = {
        k: np.zeros((4, 1), dtype=bool)
        for k in ("missing", "point_outlier", "segment_outlier", "violation")
    }
    masks["point_outlier"][2, 0] = True
    ledger = GroundTruthLedger(clean, masks["missing"], masks["point_outlier"],
                               masks["segment_outlier"], masks["violation"])
    return clean, dirty, ledger


def _flags(shape, cells=()):
    empty = np.zeros(shape, dtype=bool)
    pred = np.zeros(shape, dtype=bool)
    for t, d in cells:
        pred[t, d] = True
    return RateMasks(empty, pred, np.zeros(shape, dtype=bool))


def test_upstream_metrics_hand_example():
    clean, dirty, ledger = _single_cell_setup()
    cleaned_vals = dirty.values.copy()
    cleaned_vals[2, 0] = 12.0
    cleaned = dirty.with_values(cleaned_vals)
    m = upstream_metrics(dirty, cleaned, ledger, _flags((4, 1), [(2, 0)]))
    assert m.nmse == pytest.approx(4.0 / 100.0, abs=1e-12)
    assert m.rra == pytest.approx(1.0 - 2.0 / 10.0, abs=1e-12)
    assert m.f1 == 1.0


def test_upstream_metrics_boundaries():
    clean, dirty, ledger = _single_cell_setup()
    perfect = dirty.with_values(clean.values.copy())
    m = upstream_metrics(dirty, perfect, ledger, _flags((4, 1), [(2, 0)]))
    assert m.nmse == pytest.approx(0.0, abs=1e-12)
    assert m.rra == 1.0
    no_repair = upstream_metrics(dirty, dirty, ledger, _flags((4, 1), [(2, 0)]))
    assert no_repair.rra == 0.0
    wrong_flags = upstream_metrics(dirty, dirty, ledger, _flags((4, 1), [(1, 0)]))
    assert wrong_flags.f1 == 0.0


def test_upstream_metrics_missing_dirty_contributes_truth_magnitude():
    clean = make_frame(np.full(4, 10.0))
    dirty_vals = clean.values.copy()
    dirty_vals[2, 0] = np.nan
    dirty = clean.with_values(dirty_vals)
    masks = np.zeros((4, 1), dtype=bool)
    miss = masks.copy()
    miss[2, 0] = True
    ledger = GroundTruthLedger(clean, miss, masks, masks, masks)
    m = upstream_metrics(dirty, dirty, ledger, _flags((4, 1), [(2, 0)]))
    # still-missing cleaned cell counts as zero-filled: |0-10| / |10| -> rra 0
    assert m.rra == 0.0


def test_upstream_metrics_empty_ledger_sentinel():
    clean, dirty, _ = _single_cell_setup()
    z = np.zeros((4, 1), dtype=bool)
    ledger = GroundTruthLedger(clean, z, z, z, z)
    m = upstream_metrics(dirty, dirty, ledger, _flags((4, 1)))
    assert m.no_errors and m.f1 is None and m.nmse is None and m.rra is None


@pytest.fixture(scope="module")
def toy_dirty(clean_forecast):
    clean, task = clean_forecast
    raw, _ = inject(clean, InjectionSpec(seed=2))
    return preprocess(raw), task


def test_sampling_deterministic(toy_dirty):
    dirty, task = toy_dirty
    a = sampling_baseline(dirty, 2, seed=9, trials=5, task=task, registry=toy_registry())
    b = sampling_baseline(dirty, 2, seed=9, trials=5, task=task, registry=toy_registry())
    assert a.rewards == b.rewards
    assert [o.id for o in a.best_pipeline.steps] == [o.id for o in b.best_pipeline.steps]


def test_sampling_lmax_one_all_length_one(toy_dirty):
    dirty, task = toy_dirty
    res = sampling_baseline(dirty, 1, seed=0, trials=8, task=task, registry=toy_registry())
    assert len(res.best_pipeline.steps) == 1


def test_sampling_approaches_bruteforce(toy_dirty):
    dirty, task = toy_dirty
    reg = toy_registry()
    ops = reg.list("M") + reg.list("O") + reg.list("C")
    constraints = miner.mine_all(dirty)
    perf_dirty = downstream.evaluate(dirty, task, "Complex")
    oracle = -np.inf
    for length in (1, 2):
        for seq in itertools.product(ops, repeat=length):
            out = apply_sequence(dirty, seq, reg, constraints)
            oracle = max(oracle, downstream.evaluate(out, task, "Complex") - perf_dirty)
    res = sampling_baseline(dirty, 2, seed=1, trials=400, task=task, registry=reg)
    assert res.best_reward >= 0.95 * oracle


def test_make_synthetic_shapes_and_determinism():
    for cid, shape in (
        ("forecast-sine-trend", (512, 4)),
        ("classify-shapes", (7680, 2)),
        ("cluster-blobs", (5760, 2)),
    ):
        a, spec_a = make_synthetic(cid, 3)
        b, _ = make_synthetic(cid, 3)
        assert a.values.shape == shape
        np.testing.assert_array_equal(a.values, b.values)
    with pytest.raises(DataError):
        make_synthetic("nope", 0)


def test_forecast_corpus_has_planted_cross_relation():
    frame, _ = make_synthetic("forecast-sine-trend", 1)
    got = miner.mine_cross(frame)
    assert any(c.variables == (1, 2) for c in got)
