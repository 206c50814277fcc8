"""Tabular record ingestion, fingerprinting and labeled CSV output.

A :class:`Dataset` keeps the raw cell text of every row next to the parsed
feature values. The fingerprint is computed over that raw text in file
order, so it can be reproduced with ``sha256sum`` on a normalised copy of
the input file, and writing a labeled CSV never rewrites a number.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

NUMERIC = "numeric"
CATEGORICAL = "categorical"

DISPOSITION_COLUMN = "disposition"
HASH_KEY_COLUMN = "hash_key"

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_HEX64 = re.compile(r"^[0-9a-f]{64}$")


class Disposition(str, enum.Enum):
    HOLDOUT = "holdout"
    TEST = "test"
    TRAIN = "train"


class DatasetError(ValueError):
    """Base class for invalid input data."""


class MissingColumn(DatasetError):
    pass


class DuplicateId(DatasetError):
    pass


class RaggedRow(DatasetError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class NumericOverflow(RaggedRow):
    """A numeric column holds NaN, Inf or a value that overflows a float."""


class MissingValue(RaggedRow):
    """Empty cell in a numeric column; there is no imputation."""


class EmptyDataset(DatasetError):
    pass


class UnlabeledRecord(DatasetError):
    pass


@dataclass(frozen=True)
class Record:
    record_id: str
    features: tuple[float | str, ...]
    label: str
    disposition: Disposition | None = None
    hash_key: str | None = None
    # raw text of every input column, in header order
    cells: tuple[str, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.record_id:
            raise DatasetError("record_id must be non-empty")
        if (self.disposition is None) != (self.hash_key is None):
            raise DatasetError(
                f"record {self.record_id!r}: disposition and hash_key must be set together"
            )

    @property
    def labeled(self) -> bool:
        return self.disposition is not None


@dataclass(frozen=True)
class Dataset:
    records: tuple[Record, ...]
    schema: tuple[tuple[str, str], ...]
    label_column: str
    id_column: str
    fingerprint: str

    @property
    def n(self) -> int:
        return len(self.records)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def header(self) -> list[str]:
        return [name for name, _ in self.schema]

    @property
    def feature_columns(self) -> list[str]:
        return [n for n, _ in self.schema if n not in (self.id_column, self.label_column)]

    @property
    def feature_kinds(self) -> tuple[str, ...]:
        return tuple(
            kind for name, kind in self.schema if name not in (self.id_column, self.label_column)
        )

    @property
    def record_ids(self) -> list[str]:
        return [r.record_id for r in self.records]

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.records]

    @property
    def is_labeled(self) -> bool:
        return all(r.labeled for r in self.records)

    def with_records(self, records: Iterable[Record]) -> Dataset:
        """Same schema and fingerprint, new record values (e.g. after labeling)."""
        return replace(self, records=tuple(records))

    def subset(self, ids: Iterable[str]) -> Dataset:
        """Records whose id is in ``ids``, file order kept, fingerprint recomputed."""
        keep = set(ids)
        records = tuple(r for r in self.records if r.record_id in keep)
        if not records:
            raise EmptyDataset("subset selects no records")
        return replace(
            self,
            records=records,
            fingerprint=fingerprint(self.header, [r.cells for r in records]),
        )


def format_row(cells: Sequence[str]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(cells)
    return buf.getvalue()[:-1]


def fingerprint(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    """SHA-256 of header and rows, RFC-4180 quoted, joined by newlines."""
    h = hashlib.sha256(format_row(header).encode("utf-8"))
    for row in rows:
        h.update(b"\n")
        h.update(format_row(row).encode("utf-8"))
    return h.hexdigest()


def _is_number(text: str) -> bool:
    return bool(_NUMBER.match(text.strip()))


def _looks_nonfinite(text: str) -> bool:
    try:
        return not math.isfinite(float(text))
    except ValueError:
        return False


def _infer_kind(column: Sequence[str]) -> str:
    values = [c for c in column if c != ""]
    if not values:
        return CATEGORICAL
    if all(_is_number(v) or _looks_nonfinite(v) for v in values):
        return NUMERIC
    return CATEGORICAL


def from_rows(
    header: Sequence[str],
    rows: Sequence[Sequence[str]],
    id_column: str = "id",
    label_column: str = "label",
) -> Dataset:
    """Build a Dataset from string cells, inferring column kinds.

    A trailing ``disposition``/``hash_key`` column pair (as written by
    :func:`write_labeled_csv`) is read back into the records and kept out of
    the schema and the fingerprint.
    """
    header = list(header)
    rows = [list(r) for r in rows]
    # row numbers are 1-based file lines, the header is line 1
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise RaggedRow(i, f"expected {len(header)} cells, found {len(row)}")

    labeled = header[-2:] == [DISPOSITION_COLUMN, HASH_KEY_COLUMN]
    base_width = len(header) - 2 if labeled else len(header)
    base_header = header[:base_width]

    for col in (id_column, label_column):
        if col not in base_header:
            raise MissingColumn(f"column {col!r} not in header {base_header}")
    if id_column == label_column:
        raise DatasetError("id and label columns must differ")
    if len(set(base_header)) != len(base_header):
        raise DatasetError("duplicate column names in header")
    if not rows:
        raise EmptyDataset("no data rows")

    kinds = [
        CATEGORICAL if name in (id_column, label_column) else _infer_kind([r[j] for r in rows])
        for j, name in enumerate(base_header)
    ]
    schema = tuple(zip(base_header, kinds))
    id_pos = base_header.index(id_column)
    label_pos = base_header.index(label_column)
    feature_pos = [j for j in range(base_width) if j not in (id_pos, label_pos)]

    records = []
    seen: set[str] = set()
    for i, row in enumerate(rows, start=2):
        rid = row[id_pos]
        if rid == "":
            raise RaggedRow(i, "empty record id")
        if rid in seen:
            raise DuplicateId(f"record id {rid!r} repeated at row {i}")
        seen.add(rid)
        feats: list[float | str] = []
        for j in feature_pos:
            cell = row[j]
            if kinds[j] == NUMERIC:
                if cell == "":
                    raise MissingValue(i, f"empty numeric cell in column {base_header[j]!r}")
                value = float(cell)
                if not math.isfinite(value):
                    raise NumericOverflow(i, f"non-finite value {cell!r} in column {base_header[j]!r}")
                feats.append(value)
            else:
                feats.append(cell)
        disposition = hash_key = None
        if labeled:
            disp_text, key = row[base_width], row[base_width + 1]
            if disp_text or key:
                try:
                    disposition = Disposition(disp_text)
                except ValueError:
                    raise RaggedRow(i, f"unknown disposition {disp_text!r}") from None
                if not _HEX64.match(key):
                    raise RaggedRow(i, f"malformed hash key {key!r}")
                hash_key = key
        records.append(
            Record(
                record_id=rid,
                features=tuple(feats),
                label=row[label_pos],
                disposition=disposition,
                hash_key=hash_key,
                cells=tuple(row[:base_width]),
            )
        )

    return Dataset(
        records=tuple(records),
        schema=schema,
        label_column=label_column,
        id_column=id_column,
        fingerprint=fingerprint(base_header, (r[:base_width] for r in rows)),
    )


def load_csv(path: str | Path, id_column: str = "id", label_column: str = "label") -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        rows = list(reader)
    return from_rows(header, rows, id_column=id_column, label_column=label_column)


def labeled_csv_text(dataset: Dataset) -> str:
    unlabeled = [r.record_id for r in dataset.records if not r.labeled]
    if unlabeled:
        raise UnlabeledRecord(
            f"{len(unlabeled)} record(s) have no disposition, first: {unlabeled[0]!r}"
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.header + [DISPOSITION_COLUMN, HASH_KEY_COLUMN])
    for r in dataset.records:
        writer.writerow(list(r.cells) + [r.disposition.value, r.hash_key])
    return buf.getvalue()


def write_labeled_csv(dataset: Dataset, path: str | Path) -> None:
    """Write the input columns plus ``disposition`` and ``hash_key``."""
    text = labeled_csv_text(dataset)
    Path(path).write_text(text, encoding="utf-8", newline="")
