"""CSV dataset I/O with atomic writes and categorical label mapping."""

from __future__ import annotations

import csv
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np


@contextmanager
def atomic_write(path, mode="w"):
    """Write to a temp file in the target directory, rename on success.

    A failed write never leaves a partial output file behind.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=os.path.basename(path) + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, newline="" if "b" not in mode else None) as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def format_float(v: float) -> str:
    """Shortest decimal text that parses back to the exact same float64."""
    return repr(float(v))


@dataclass
class TabularData:
    """A loaded CSV: numeric matrix per column plus categorical mappings.

    ``label_maps`` records, for every originally non-numeric column, the
    sorted original labels; the stored codes are their indices.
    """

    columns: list
    matrix: np.ndarray
    label_maps: dict = field(default_factory=dict)
    target: str | None = None

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ValueError(f"no column named {name!r}; have {self.columns}")
        return self.matrix[:, self.columns.index(name)]

    def split_target(self, target_col: str):
        """Return (X, y, x_columns); y is int-coded if the column was categorical."""
        if target_col not in self.columns:
            raise ValueError(f"missing target column {target_col!r}; have {self.columns}")
        k = self.columns.index(target_col)
        keep = [i for i in range(len(self.columns)) if i != k]
        x = self.matrix[:, keep]
        y = self.matrix[:, k]
        if target_col in self.label_maps:
            y = y.astype(np.int64)
        return x, y, [self.columns[i] for i in keep]


def load_csv(path, require_target: str | None = None) -> TabularData:
    """Load a headered CSV into float64 columns.

    Columns where every cell parses as a number stay numeric; columns where
    no cell parses numeric are treated as categorical and coded by the sorted
    order of their distinct labels. A lone non-numeric cell in an otherwise
    numeric column is an error naming the row and column.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        rows = list(reader)
    if not header or any(not c for c in header):
        raise ValueError(f"{path}: header row has empty column names")
    n_cols = len(header)
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} cells, expected {n_cols}")
    if not rows:
        raise ValueError(f"{path}: no data rows")

    matrix = np.empty((len(rows), n_cols))
    label_maps = {}
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        parsed = []
        first_bad = None
        for i, cell in enumerate(cells):
            try:
                parsed.append(float(cell))
            except ValueError:
                parsed.append(np.nan)
                if first_bad is None:
                    first_bad = i
        if first_bad is None:
            matrix[:, j] = parsed
        elif all(np.isnan(v) for v in parsed):
            # fully non-numeric column: categorical, coded by sorted label order
            levels = sorted(set(cells))
            codes = {lab: k for k, lab in enumerate(levels)}
            matrix[:, j] = [codes[c] for c in cells]
            label_maps[name] = levels
        else:
            raise ValueError(
                f"{path}: non-numeric cell {cells[first_bad]!r} at row "
                f"{first_bad + 2}, column {name!r}"
            )
    if require_target is not None and require_target not in header:
        raise ValueError(f"{path}: missing target column {require_target!r}; have {header}")
    return TabularData(columns=list(header), matrix=matrix, label_maps=label_maps)


def save_csv(path, columns, matrix, label_maps: dict | None = None):
    """Write a headered CSV; floats keep full float64 text precision.

    Columns listed in ``label_maps`` are written back as their original
    labels rather than integer codes.
    """
    matrix = np.atleast_2d(np.asarray(matrix))
    if matrix.shape[1] != len(columns):
        raise ValueError(f"matrix has {matrix.shape[1]} columns, header has {len(columns)}")
    label_maps = label_maps or {}
    with atomic_write(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        decoders = [label_maps.get(c) for c in columns]
        for row in matrix:
            out = []
            for v, dec in zip(row, decoders):
                if dec is not None:
                    out.append(dec[int(v)])
                else:
                    out.append(format_float(v))
            writer.writerow(out)
