"""Numeric CSV reading and round-trip writing.

Input files are comma-delimited with an optional header row. Floats are
written with ``repr`` so re-parsing reproduces the exact binary value.
"""

import csv

import numpy as np

from .errors import CsvParseError


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_rows(path):
    """Parse ``path`` into a list of float rows; returns ``(header, rows)``."""
    with open(path, newline="") as fh:
        raw = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not raw:
        raise CsvParseError(path, 1, 1, "file is empty")
    header = None
    start = 0
    if not all(_is_number(c) for c in raw[0]):
        header, start = [c.strip() for c in raw[0]], 1
    rows = []
    width = None
    for i, r in enumerate(raw[start:], start=start + 1):
        if width is None:
            width = len(r)
        elif len(r) != width:
            raise CsvParseError(path, i, len(r), f"expected {width} fields, found {len(r)}")
        vals = []
        for j, cell in enumerate(r, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise CsvParseError(path, i, j, f"not a number: {cell!r}") from None
            if not np.isfinite(v):
                raise CsvParseError(path, i, j, f"non-finite value: {cell!r}")
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise CsvParseError(path, start + 1, 1, "no data rows")
    return header, rows


def read_matrix(path) -> np.ndarray:
    return np.array(read_rows(path)[1], dtype=np.float64)


def read_vector(path) -> np.ndarray:
    """A single column, or a single row, of numbers."""
    m = read_matrix(path)
    if m.shape[1] == 1:
        return m[:, 0]
    if m.shape[0] == 1:
        return m[0]
    raise CsvParseError(path, 1, 2, f"expected one column, found {m.shape[1]}")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in r])
