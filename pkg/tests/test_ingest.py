"""CSV round-trips, duplicate handling, and grid regularization."""

import numpy as np
import pytest

from tsscrub.core import DataError, TimeSeriesFrame
from tsscrub.ingest import (
    RawFrame,
    deduplicate,
    preprocess,
    read_csv,
    regularize,
    write_csv,
)


def test_read_csv_empty_cell_becomes_missing(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("t,a\n0,1\n1,\n2,3\n")
    raw = read_csv(p)
    assert np.isnan(raw.values[1, 0])
    assert raw.variable_names == ("a",)


def test_read_csv_header_only_rejected(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("t,a\n0,1\n")
    with pytest.raises(DataError, match="at least 2 rows"):
        read_csv(p)


def test_read_csv_unsorted_rejected(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("t,a\n5,1\n3,2\n")
    with pytest.raises(DataError, match="unsorted"):
        read_csv(p)


def test_read_csv_bad_cell_names_position(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("t,a,b\n0,1,2\n1,x,3\n")
    with pytest.raises(DataError, match="row 2.*'a'"):
        read_csv(p)


def test_read_csv_iso8601(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("t,a\n2020-01-01T00:00:00,1\n2020-01-01T01:00:00,2\n")
    raw = read_csv(p, timestamp_format="iso8601")
    assert raw.timestamps[1] - raw.timestamps[0] == 3600


def test_deduplicate_keeps_first():
    raw = RawFrame(
        np.array([0, 1, 1, 2, 4]),
        np.array([[0.0], [1.0], [2.0], [3.0], [4.0]]),
        ("a",),
    )
    out = deduplicate(raw)
    np.testing.assert_array_equal(out.timestamps, [0, 1, 2, 4])
    np.testing.assert_array_equal(out.values[:, 0], [0.0, 1.0, 3.0, 4.0])
    assert out.duplicates_dropped == 1


def test_deduplicate_identity_when_clean():
    raw = RawFrame(np.array([0, 1, 2]), np.zeros((3, 1)), ("a",))
    assert deduplicate(raw) is raw


def test_deduplicate_degenerate_all_same_timestamp():
    raw = RawFrame(np.array([7, 7, 7]), np.arange(3.0)[:, None], ("a",))
    with pytest.raises(DataError, match="at least 2 rows"):
        deduplicate(raw)


def test_regularize_inserts_missing_row():
    raw = RawFrame(np.array([0, 1, 2, 4]), np.array([[0.0], [1.0], [2.0], [4.0]]), ("a",))
    frame = regularize(raw)
    np.testing.assert_array_equal(frame.timestamps, [0, 1, 2, 3, 4])
    assert np.isnan(frame.values[3, 0])
    np.testing.assert_array_equal(frame.values[[0, 1, 2, 4], 0], [0.0, 1.0, 2.0, 4.0])


def test_regularize_no_insertions_at_wider_step():
    raw = RawFrame(np.array([0, 2, 4]), np.array([[0.0], [2.0], [4.0]]), ("a",))
    frame = regularize(raw)
    np.testing.assert_array_equal(frame.timestamps, [0, 2, 4])
    assert not np.isnan(frame.values).any()


def test_regularize_tied_mode_prefers_smaller_step():
    raw = RawFrame(np.array([0, 1, 3]), np.array([[0.0], [1.0], [3.0]]), ("a",))
    frame = regularize(raw)
    np.testing.assert_array_equal(frame.timestamps, [0, 1, 2, 3])


def test_regularize_off_grid_snaps_with_warning():
    raw = RawFrame(np.array([0, 10, 20, 25, 40]), np.arange(5.0)[:, None], ("a",))
    with pytest.warns(UserWarning, match="off-grid"):
        frame = regularize(raw)
    # 25 -> offset 2.5 -> round-half-down -> tick 2 (t=20, occupied) warns too
    assert frame.timestamps[0] == 0 and frame.timestamps[-1] == 40


def test_preprocess_idempotent():
    raw = RawFrame(
        np.array([0, 1, 1, 2, 4]),
        np.array([[0.0], [1.0], [2.0], [3.0], [4.0]]),
        ("a",),
    )
    once = preprocess(raw)
    again = regularize(
        deduplicate(RawFrame(once.timestamps, once.values, once.variable_names))
    )
    assert once.equals(again)


def test_conservation_every_survivor_lands_once():
    rng = np.random.default_rng(0)
    diffs = rng.choice([3, 3, 3, 6, 9], size=29)
    ts = np.concatenate([[0], np.cumsum(diffs)])
    vals = rng.normal(size=(30, 2))
    raw = deduplicate(RawFrame(ts, vals, ("a", "b")))
    frame = regularize(raw)
    for i, t in enumerate(raw.timestamps):
        grid_pos = np.nonzero(frame.timestamps == t)[0]
        assert grid_pos.size == 1
        np.testing.assert_array_equal(frame.values[grid_pos[0]], raw.values[i])


def test_write_read_roundtrip(tmp_path, small_frame):
    p = tmp_path / "out.csv"
    write_csv(small_frame, p)
    back = preprocess(read_csv(p))
    assert back.equals(small_frame)


def test_write_csv_missing_as_empty(tmp_path, small_frame):
    p = tmp_path / "out.csv"
    write_csv(small_frame, p)
    lines = p.read_text().splitlines()
    assert lines[3] == "2,,30.0"


def test_write_csv_unwritable_path(small_frame, tmp_path):
    with pytest.raises(OSError):
        write_csv(small_frame, tmp_path / "nope" / "out.csv")


def test_roundtrip_preserves_float_precision(tmp_path):
    vals = np.array([[0.1 + 0.2], [1e-17], [123456789.123456789]])
    frame = TimeSeriesFrame(np.arange(3), vals, ("a",))
    p = tmp_path / "prec.csv"
    write_csv(frame, p)
    back = preprocess(read_csv(p))
    np.testing.assert_array_equal(back.values, frame.values)
