"""Analytical views over a trained codebook.

Component planes project one variable's weight component onto the grid;
the U-matrix marks cluster boundaries as ridges of neighbor distance; hit
maps count records per cell; similar-record groups connect records whose
winning cells sit within a grid radius; factor correlations are read off
the component planes (Pearson across neurons).
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, UsageError
from .ingest import EncodedMatrix, LIKERT_LEVELS
from .som import BmuAssignment, Codebook


@dataclass
class GridMap:
    """A scalar field over grid cells, optionally labeled per cell."""

    width: int
    height: int
    values: np.ndarray
    labels: list[list[str]] | None = None
    legend: dict[float, str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.width * self.height,):
            raise ValueError("values length must be width*height")
        if self.labels is not None:
            if len(self.labels) != self.width * self.height:
                raise ValueError("labels length must be width*height")
            flat = [rid for cell in self.labels for rid in cell]
            dupes = [rid for rid, cnt in Counter(flat).items() if cnt > 1]
            if dupes:
                raise ValueError(f"record ids labeled in more than one cell: {dupes[:5]}")

    @property
    def size(self) -> int:
        return self.width * self.height

    def to_json(self) -> str:
        doc = {
            "width": self.width,
            "height": self.height,
            "values": [float(v) for v in self.values],
            "labels": self.labels,
            "legend": {repr(k): v for k, v in self.legend.items()} if self.legend else None,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "GridMap":
        doc = json.loads(text)
        legend = doc.get("legend")
        return GridMap(
            width=int(doc["width"]),
            height=int(doc["height"]),
            values=np.asarray(doc["values"], dtype=np.float64),
            labels=doc.get("labels"),
            legend={float(k): v for k, v in legend.items()} if legend else None,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "GridMap":
        return GridMap.from_json(Path(path).read_text(encoding="utf-8"))


LIKERT_LEGEND = {float(i + 1): name for i, name in enumerate(LIKERT_LEVELS)}


def component_plane(cb: Codebook, variable: str) -> GridMap:
    """One variable's weight component per cell, with the Likert legend."""
    if variable not in cb.col_names:
        raise DataError(f"unknown variable {variable!r}; codebook has {cb.col_names}")
    col = cb.col_names.index(variable)
    return GridMap(
        cb.width, cb.height, cb.weights[:, col].copy(),
        legend=dict(LIKERT_LEGEND),
    )


def u_matrix(cb: Codebook) -> GridMap:
    """Mean weight-space distance from each cell to its grid neighbors."""
    g = cb.grid
    values = np.zeros(cb.size, dtype=np.float64)
    for i in range(cb.size):
        neigh = g.neighbors(i)
        if neigh:
            d = cb.weights[neigh] - cb.weights[i]
            values[i] = float(np.sqrt((d * d).sum(axis=1)).mean())
    return GridMap(cb.width, cb.height, values)


def hit_map(assign: BmuAssignment, cb: Codebook) -> GridMap:
    """Per-cell record count with the record ids as cell labels."""
    if len(assign) and (assign.cells.min() < 0 or assign.cells.max() >= cb.size):
        raise DataError("assignment references cells outside the codebook grid")
    values = np.zeros(cb.size, dtype=np.float64)
    labels: list[list[str]] = [[] for _ in range(cb.size)]
    for rid, cell, _ in assign.entries():
        values[cell] += 1.0
        labels[cell].append(rid)
    return GridMap(cb.width, cb.height, values, labels=labels)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def similar_groups(
    assign: BmuAssignment, cb: Codebook, radius: float
) -> list[list[str]]:
    """Partition records into connected groups of nearby winners.

    Two records are linked when their BMUs lie within the given grid
    distance; groups are the connected components. radius 0 groups exact
    cell-sharers. Groups are ordered by their first record's position in
    the assignment, records within a group keep assignment order.
    """
    if radius < 0:
        raise UsageError("radius must be non-negative")
    g = cb.grid
    occupied = sorted({int(c) for c in assign.cells})
    cell_pos = {c: i for i, c in enumerate(occupied)}
    uf = _UnionFind(len(occupied))
    coords = g.coords
    for i, a in enumerate(occupied):
        for j in range(i + 1, len(occupied)):
            b = occupied[j]
            d = coords[a] - coords[b]
            if math.hypot(d[0], d[1]) <= radius:
                uf.union(i, j)

    groups: dict[int, list[str]] = {}
    order: list[int] = []
    for rid, cell, _ in assign.entries():
        root = uf.find(cell_pos[cell])
        if root not in groups:
            groups[root] = []
            order.append(root)
        groups[root].append(rid)
    return [groups[root] for root in order]


def plane_correlation(cb: Codebook, var_a: str, var_b: str) -> float:
    """Pearson correlation of two component planes across all neurons."""
    for v in (var_a, var_b):
        if v not in cb.col_names:
            raise DataError(f"unknown variable {v!r}; codebook has {cb.col_names}")
    a = cb.weights[:, cb.col_names.index(var_a)]
    b = cb.weights[:, cb.col_names.index(var_b)]
    return _pearson(a, b, var_a, var_b)


def _pearson(a: np.ndarray, b: np.ndarray, name_a: str, name_b: str) -> float:
    ac = a - a.mean()
    bc = b - b.mean()
    va = float((ac * ac).sum())
    vb = float((bc * bc).sum())
    if va == 0.0 or vb == 0.0:
        flat = name_a if va == 0.0 else name_b
        raise DataError(f"correlation undefined: plane {flat!r} has zero variance")
    r = float((ac * bc).sum()) / math.sqrt(va * vb)
    return max(-1.0, min(1.0, r))


@dataclass
class CorrelationReport:
    names: list[str]
    matrix: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["variable"] + self.names)
        for i, name in enumerate(self.names):
            writer.writerow([name] + [repr(float(v)) for v in self.matrix[i]])
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def correlation_report(cb: Codebook) -> CorrelationReport:
    """Pairwise plane correlations for every codebook variable; symmetric
    by construction since each unordered pair is computed once."""
    names = list(cb.col_names)
    n = len(names)
    matrix = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            r = plane_correlation(cb, names[i], names[j])
            matrix[i, j] = r
            matrix[j, i] = r
    return CorrelationReport(names, matrix)


def raw_correlation_report(data: EncodedMatrix) -> CorrelationReport:
    """Data-space Pearson over matrix columns, for cross-checking the
    plane-based reading. Requires a fully-observed matrix."""
    if data.missing.any():
        raise DataError("raw correlations need a fully-observed matrix; impute first")
    names = list(data.col_names)
    n = len(names)
    matrix = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            r = _pearson(data.values[:, i], data.values[:, j], names[i], names[j])
            matrix[i, j] = r
            matrix[j, i] = r
    return CorrelationReport(names, matrix)
