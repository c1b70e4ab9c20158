"""2-D neuron lattice geometry: cell coordinates, distances, adjacency.

Cells are indexed row-major: index = row * width + col. Rectangular grids
place cell centers on the integer lattice; hexagonal grids use odd-row
offset coordinates (odd rows shifted right by half a cell, rows packed at
sqrt(3)/2), which makes the six hex neighbors sit at distance exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TOPOLOGIES = ("rectangular", "hexagonal")

_ROW_PITCH = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class Grid:
    width: int
    height: int
    topology: str = "rectangular"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.width}x{self.height}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")

    @property
    def size(self) -> int:
        return self.width * self.height

    def cell_rc(self, index: int) -> tuple[int, int]:
        return divmod(index, self.width)

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    @cached_property
    def coords(self) -> np.ndarray:
        """(size, 2) array of cartesian (x, y) cell-center positions."""
        rows, cols = np.divmod(np.arange(self.size), self.width)
        if self.topology == "hexagonal":
            x = cols + 0.5 * (rows % 2)
            y = rows * _ROW_PITCH
        else:
            x = cols.astype(np.float64)
            y = rows.astype(np.float64)
        return np.column_stack([x, y]).astype(np.float64)

    def distance(self, a: int, b: int) -> float:
        """Euclidean distance between two cell centers."""
        d = self.coords[a] - self.coords[b]
        return float(math.hypot(d[0], d[1]))

    def distances_from(self, index: int) -> np.ndarray:
        """Distances from one cell to every cell, shape (size,)."""
        d = self.coords - self.coords[index]
        return np.sqrt((d * d).sum(axis=1))

    def neighbors(self, index: int) -> list[int]:
        """Directly adjacent cells: 4-neighborhood on rectangular grids,
        6-neighborhood on hexagonal grids."""
        row, col = self.cell_rc(index)
        if self.topology == "rectangular":
            steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
        elif row % 2 == 0:
            steps = [(0, -1), (0, 1), (-1, -1), (-1, 0), (1, -1), (1, 0)]
        else:
            steps = [(0, -1), (0, 1), (-1, 0), (-1, 1), (1, 0), (1, 1)]
        out = []
        for dr, dc in steps:
            r, c = row + dr, col + dc
            if 0 <= r < self.height and 0 <= c < self.width:
                out.append(self.index(r, c))
        return out

    def are_adjacent(self, a: int, b: int) -> bool:
        return b in self.neighbors(a)
