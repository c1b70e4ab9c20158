"""Encoded-matrix interchange format.

A plain CSV: header ``record_id`` plus one column per variable, one row
per record. Missing entries are written as empty fields (the inline
sentinel); observed values use shortest round-trip float formatting, so a
save/load cycle is bit-exact.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError
from .ingest import EncodedMatrix


def save_matrix(m: EncodedMatrix, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id"] + list(m.col_names))
        for i, rid in enumerate(m.row_ids):
            row: list[str] = [rid]
            for j in range(len(m.col_names)):
                row.append("" if m.missing[i, j] else repr(float(m.values[i, j])))
            writer.writerow(row)


def load_matrix(path: str | Path) -> EncodedMatrix:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"matrix file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty matrix file")
        if not header or header[0] != "record_id":
            raise DataError(f"{path}: matrix header must start with 'record_id'")
        col_names = header[1:]
        row_ids: list[str] = []
        rows: list[list[float]] = []
        mask_rows: list[list[bool]] = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}")
            row_ids.append(row[0])
            vals: list[float] = []
            miss: list[bool] = []
            for field, name in zip(row[1:], col_names):
                if field == "":
                    vals.append(float("nan"))
                    miss.append(True)
                else:
                    try:
                        vals.append(float(field))
                    except ValueError:
                        raise DataError(
                            f"{path}: row {row_no}, column {name!r}: bad number {field!r}"
                        )
                    miss.append(False)
            rows.append(vals)
            mask_rows.append(miss)
    values = np.asarray(rows, dtype=np.float64).reshape(len(row_ids), len(col_names))
    missing = np.asarray(mask_rows, dtype=bool).reshape(len(row_ids), len(col_names))
    return EncodedMatrix(values, missing, row_ids, col_names)
