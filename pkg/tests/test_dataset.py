import hashlib
import random

import pytest
from hypothesis import given, settings, strategies as st

from holdout_kfold.dataset import (
    CATEGORICAL,
    NUMERIC,
    DuplicateId,
    EmptyDataset,
    MissingColumn,
    MissingValue,
    NumericOverflow,
    RaggedRow,
    UnlabeledRecord,
    from_rows,
    labeled_csv_text,
    load_csv,
    write_labeled_csv,
)
from holdout_kfold.partitioner import build_plan

from conftest import make_dataset, write_csv

HEADER = ["id", "x", "y", "label"]
ROWS = [["p1", "1.5", "2", "a"], ["p2", "3", "4", "b"], ["p3", "5", "6", "a"], ["p4", "7", "8e1", "b"]]


def test_load_infers_kinds_and_is_deterministic(tmp_path):
    path = write_csv(tmp_path / "d.csv", HEADER, ROWS)
    a, b = load_csv(path), load_csv(path)
    assert a.n == 4
    assert a.schema == (("id", CATEGORICAL), ("x", NUMERIC), ("y", NUMERIC), ("label", CATEGORICAL))
    assert a.records[3].features == (7.0, 80.0)
    assert a.fingerprint == b.fingerprint
    assert a.schema == b.schema


def test_fingerprint_matches_sha256_of_file(tmp_path):
    path = write_csv(tmp_path / "d.csv", HEADER, ROWS)
    # frozen with `printf 'id,x,y,label\np1,...' | sha256sum`
    assert load_csv(path).fingerprint == "5ed007e35df3e8e09057ea0689384bf27217e9b37fda174b4e931b8a284335ac"
    text = path.read_text().rstrip("\n").encode()
    assert load_csv(path).fingerprint == hashlib.sha256(text).hexdigest()


def test_one_cell_edit_changes_fingerprint(tmp_path):
    edited = [r[:] for r in ROWS]
    edited[3][2] = "9e1"
    path = write_csv(tmp_path / "e.csv", HEADER, edited)
    assert load_csv(path).fingerprint == "b95cb5d1f2b706faf8db7f620f9624e748cb33acd0a056efd9257050517ea09b"


def test_duplicate_id(tmp_path):
    path = write_csv(tmp_path / "d.csv", HEADER, ROWS + [["p1", "0", "0", "a"]])
    with pytest.raises(DuplicateId):
        load_csv(path)


def test_missing_column():
    with pytest.raises(MissingColumn):
        from_rows(HEADER, ROWS, label_column="target")


def test_ragged_row_reports_line():
    with pytest.raises(RaggedRow) as exc:
        from_rows(HEADER, ROWS[:2] + [["p9", "1", "a"]])
    assert exc.value.row == 4


def test_empty_dataset(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("id,x,label\n")
    with pytest.raises(EmptyDataset):
        load_csv(path)


@pytest.mark.parametrize("bad", ["nan", "inf", "-Infinity", "1e999"])
def test_nonfinite_numbers_rejected(bad):
    rows = [r[:] for r in ROWS]
    rows[1][1] = bad
    with pytest.raises(NumericOverflow):
        from_rows(HEADER, rows)


def test_empty_numeric_cell_rejected():
    rows = [r[:] for r in ROWS]
    rows[0][1] = ""
    with pytest.raises(MissingValue):
        from_rows(HEADER, rows)


def test_mixed_column_is_categorical():
    rows = [r[:] for r in ROWS]
    rows[0][1] = "high"
    d = from_rows(HEADER, rows)
    assert dict(d.schema)["x"] == CATEGORICAL
    assert d.records[1].features[0] == "3"


def test_labeled_output_shape_and_round_trip(tmp_path):
    d = make_dataset(10, seed=1)
    _, labeled = build_plan(d, "s1", 7, 3)
    out = tmp_path / "labeled.csv"
    write_labeled_csv(labeled, out)
    lines = out.read_text().splitlines()
    assert len(lines) == 11
    assert lines[0].split(",") == d.header + ["disposition", "hash_key"]
    back = load_csv(out)
    assert back.records == labeled.records
    assert back.fingerprint == d.fingerprint
    assert back.schema == d.schema


def test_unlabeled_record_rejected(tmp_path):
    d = make_dataset(10, seed=1)
    _, labeled = build_plan(d, "s1", 7, 3)
    records = list(labeled.records)
    records[4] = d.records[4]
    with pytest.raises(UnlabeledRecord):
        write_labeled_csv(labeled.with_records(records), tmp_path / "x.csv")


def test_quoted_cells_round_trip(tmp_path):
    rows = [["a,1", "x \"q\"", "1"], ["b", "y", "0"], ["c", "z", "1"]]
    d = from_rows(["id", "txt", "label"], rows)
    _, labeled = build_plan(d, "s", 1, 3)
    out = tmp_path / "q.csv"
    write_labeled_csv(labeled, out)
    assert load_csv(out).records == labeled.records


def test_fingerprint_ignores_in_memory_order():
    d = make_dataset(30, seed=2)
    recs = list(d.records)
    random.Random(0).shuffle(recs)
    assert d.with_records(recs).fingerprint == d.fingerprint


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(-1000, 1000), st.sampled_from(["u", "v", "w,x"]), st.sampled_from(["a", "b"])),
        min_size=3,
        max_size=30,
    ),
    st.integers(0, 2**64 - 1),
)
def test_write_load_round_trip_property(tmp_path_factory, cells, seed):
    rows = [[f"id{i}", str(x), c, lab] for i, (x, c, lab) in enumerate(cells)]
    d = from_rows(["id", "x", "c", "label"], rows)
    _, labeled = build_plan(d, "prop", seed, 3)
    path = tmp_path_factory.mktemp("rt") / "o.csv"
    write_labeled_csv(labeled, path)
    back = load_csv(path)
    assert back.records == labeled.records
    assert labeled_csv_text(back) == labeled_csv_text(labeled)
