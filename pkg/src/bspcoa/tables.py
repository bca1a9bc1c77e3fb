"""Count-table ingestion, filtering and delimited-text helpers.

The on-disk layout is a delimited table whose first row holds taxon
labels (first cell names the sample-id column) and whose first column
holds sample IDs. Floats are serialized with ``repr`` so emitted files
round-trip to numerically identical matrices.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .ordination import FeatureMatrix

__all__ = [
    "CountTable",
    "detect_delimiter",
    "parse_count_table",
    "prevalence_filter",
    "to_relative_abundance",
    "write_count_table",
    "read_matrix_csv",
    "fmt_float",
]


@dataclass(frozen=True)
class CountTable:
    """Samples-by-taxa nonnegative abundance table with labels."""

    values: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise DataError(f"count table must be 2-dimensional, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("count table contains non-finite entries")
        if arr.min() < 0:
            raise DataError("count table contains negative entries")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "col_ids", tuple(self.col_ids))
        if len(self.row_ids) != arr.shape[0] or len(self.col_ids) != arr.shape[1]:
            raise DataError("label lengths do not match count table shape")

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_taxa(self):
        return self.values.shape[1]

    def to_feature_matrix(self) -> FeatureMatrix:
        return FeatureMatrix(self.values, self.row_ids, self.col_ids)


def detect_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def parse_count_table(path, delimiter: str | None = None) -> CountTable:
    """Parse a delimited count table, reporting the location of errors.

    Raises :class:`DataError` for ragged rows, non-numeric or negative
    cells, and duplicate sample or taxon IDs.
    """
    ids, col_ids, lines = _read_delimited(path, delimiter)
    rows = []
    for line_no, rid, cells in lines:
        parsed = []
        for j, cell in enumerate(cells):
            try:
                val = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell!r} at line {line_no}, column {col_ids[j]!r}"
                ) from None
            if not np.isfinite(val):
                raise DataError(f"{path}: non-finite cell at line {line_no}, column {col_ids[j]!r}")
            if val < 0:
                raise DataError(
                    f"{path}: negative cell {cell!r} at line {line_no}, column {col_ids[j]!r}"
                )
            parsed.append(val)
        rows.append(parsed)
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 samples, found {len(rows)}")
    return CountTable(np.asarray(rows, dtype=float), tuple(ids), tuple(col_ids))


def read_matrix_csv(path, delimiter: str | None = None):
    """Read a labeled numeric matrix (signed values allowed).

    Returns ``(row_ids, col_names, values)``. Accepts the coordinate
    files emitted by the CLI, including their leading config comment.
    """
    ids, col_names, lines = _read_delimited(path, delimiter)
    rows = []
    for line_no, _, cells in lines:
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise DataError(f"{path}: non-numeric cell at line {line_no}") from None
    return tuple(ids), tuple(col_names), np.asarray(rows, dtype=float)


def _read_delimited(path, delimiter):
    """Shared labeled-table reader: skips '#' comments and blank lines,
    validates shape and ID uniqueness, returns raw string cells."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        numbered = [
            (i, ln) for i, ln in enumerate(fh.read().splitlines(), start=1)
            if ln.strip() and not ln.startswith("#")
        ]
    if not numbered:
        raise DataError(f"{path}: empty input file")
    delim = delimiter or detect_delimiter(numbered[0][1])
    parsed = list(zip(
        [no for no, _ in numbered],
        csv.reader([ln for _, ln in numbered], delimiter=delim),
    ))
    header = parsed[0][1]
    col_ids = [c.strip() for c in header[1:]]
    if not col_ids:
        raise DataError(f"{path}: header row has no data columns")
    seen = set()
    for j, c in enumerate(col_ids):
        if c in seen:
            raise DataError(f"{path}: duplicate column ID {c!r} (column {j + 2})")
        seen.add(c)
    row_ids = []
    lines = []
    seen_rows = set()
    for line_no, row in parsed[1:]:
        if len(row) != len(col_ids) + 1:
            raise DataError(
                f"{path}: line {line_no} has {len(row)} fields, expected {len(col_ids) + 1}"
            )
        rid = row[0].strip()
        if rid in seen_rows:
            raise DataError(f"{path}: duplicate sample ID {rid!r} (line {line_no})")
        seen_rows.add(rid)
        row_ids.append(rid)
        lines.append((line_no, rid, row[1:]))
    return row_ids, col_ids, lines


def prevalence_filter(table: CountTable, threshold: float):
    """Drop taxa present in fewer than ``threshold`` fraction of samples.

    Returns ``(filtered_table, n_dropped)``.
    """
    if not 0.0 <= threshold <= 1.0:
        raise DataError(f"prevalence threshold must lie in [0, 1], got {threshold}")
    prevalence = (table.values > 0).mean(axis=0)
    keep = prevalence >= threshold
    if not keep.any():
        raise DataError(f"prevalence filter at {threshold} removes every taxon")
    dropped = int((~keep).sum())
    filtered = CountTable(
        table.values[:, keep],
        table.row_ids,
        tuple(c for c, k in zip(table.col_ids, keep) if k),
    )
    return filtered, dropped


def to_relative_abundance(table: CountTable) -> CountTable:
    """Row-normalize counts to compositions summing to one."""
    sums = table.values.sum(axis=1)
    bad = np.flatnonzero(sums == 0)
    if bad.size:
        raise DataError(f"sample {table.row_ids[bad[0]]!r} has zero total abundance")
    return CountTable(table.values / sums[:, None], table.row_ids, table.col_ids)


def fmt_float(x) -> str:
    """Shortest round-trip decimal representation of a float."""
    if x is None:
        return "NA"
    x = float(x)
    if np.isnan(x):
        return "NA"
    return repr(x)


def write_count_table(table: CountTable, path, delimiter: str = ",", id_header: str = "sample_id"):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow([id_header, *table.col_ids])
        for rid, row in zip(table.row_ids, table.values):
            writer.writerow([rid, *(fmt_float(v) for v in row)])
