"""Sequential self-organizing-map training on an encoded survey matrix.

The map is a 2-D lattice of neurons whose weight vectors live in data
space. Each presentation finds the best matching unit (minimum Euclidean
distance, ties to the lowest cell index) and pulls every neuron inside
the current neighborhood radius toward the sample:

    w_i <- w_i + eta * (x - w_i)

where eta is the learning rate inside the neighborhood and exactly zero
outside it (bubble), or a Gaussian falloff of the grid distance. Training
runs an ordering phase (high rate, wide radius) followed by a convergence
phase (rate around 0.01, tight radius), presenting records in seeded
shuffled sweeps.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DataError, NumericError, UsageError
from .grid import Grid
from .ingest import EncodedMatrix

NEIGHBORHOODS = ("bubble", "gaussian")
INITS = ("random-uniform", "linear")
STOP_MODES = ("fixed-iterations", "weight-delta")


@dataclass
class Codebook:
    """Grid of weight vectors plus lattice metadata."""

    width: int
    height: int
    weights: np.ndarray  # (width*height, n) row-major
    topology: str = "rectangular"
    col_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[0] != self.width * self.height:
            raise ValueError("weights must be (width*height, n)")
        if not np.isfinite(self.weights).all():
            raise NumericError("codebook weights must be finite")
        if self.col_names and len(self.col_names) != self.weights.shape[1]:
            raise ValueError("col_names length must match weight dimension")

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def grid(self) -> Grid:
        return Grid(self.width, self.height, self.topology)

    def copy(self) -> "Codebook":
        return Codebook(self.width, self.height, self.weights.copy(),
                        self.topology, list(self.col_names))


@dataclass(frozen=True)
class PhaseSchedule:
    """Per-phase iteration budget with linearly interpolated rate/radius."""

    iterations: int
    mu_start: float
    mu_end: float
    radius_start: float
    radius_end: float

    def __post_init__(self):
        if self.iterations < 1:
            raise UsageError("phase iterations must be >= 1")
        for mu in (self.mu_start, self.mu_end):
            if not 0.0 < mu < 1.0:
                raise UsageError(f"learning rate must be in (0,1), got {mu}")
        if self.mu_end > self.mu_start:
            raise UsageError("mu must be non-increasing within a phase")
        if self.radius_start < 0 or self.radius_end < 0:
            raise UsageError("radius must be non-negative")
        if self.radius_end > self.radius_start:
            raise UsageError("radius must be non-increasing within a phase")

    def at(self, k: int) -> tuple[float, float]:
        """(mu, radius) for presentation k of this phase."""
        t = k / (self.iterations - 1) if self.iterations > 1 else 0.0
        mu = self.mu_start + (self.mu_end - self.mu_start) * t
        radius = self.radius_start + (self.radius_end - self.radius_start) * t
        return mu, radius

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "mu_start": self.mu_start,
            "mu_end": self.mu_end,
            "radius_start": self.radius_start,
            "radius_end": self.radius_end,
        }

    @staticmethod
    def from_dict(d: dict) -> "PhaseSchedule":
        return PhaseSchedule(
            iterations=int(d["iterations"]),
            mu_start=float(d["mu_start"]),
            mu_end=float(d["mu_end"]),
            radius_start=float(d["radius_start"]),
            radius_end=float(d["radius_end"]),
        )


@dataclass(frozen=True)
class TrainingConfig:
    """Full training recipe; the seed determines every stochastic choice.

    ordering/convergence left as None resolve against the record count R:
    ordering runs 10*R presentations with mu 0.9 -> 0.05 and radius
    max(width, height)/2 -> 1; convergence runs 40*R presentations at a
    constant mu of 0.01 with radius held at 1.
    """

    grid: tuple[int, int] = (30, 30)
    topology: str = "rectangular"
    neighborhood: str = "bubble"
    ordering: PhaseSchedule | None = None
    convergence: PhaseSchedule | None = None
    init: str = "random-uniform"
    seed: int = 0
    stop: str = "fixed-iterations"
    epsilon: float = 1e-6

    def __post_init__(self):
        w, h = self.grid
        if w < 1 or h < 1:
            raise UsageError(f"grid dimensions must be >= 1, got {self.grid}")
        if self.neighborhood not in NEIGHBORHOODS:
            raise UsageError(f"neighborhood must be one of {NEIGHBORHOODS}")
        if self.init not in INITS:
            raise UsageError(f"init must be one of {INITS}")
        if self.stop not in STOP_MODES:
            raise UsageError(f"stop must be one of {STOP_MODES}")
        if self.epsilon <= 0:
            raise UsageError("epsilon must be positive")

    def resolved(self, n_records: int) -> "TrainingConfig":
        """Fill default phase schedules for a matrix of n_records rows."""
        w, h = self.grid
        ordering = self.ordering or PhaseSchedule(
            iterations=10 * n_records,
            mu_start=0.9, mu_end=0.05,
            radius_start=max(w, h) / 2.0, radius_end=1.0,
        )
        convergence = self.convergence or PhaseSchedule(
            iterations=40 * n_records,
            mu_start=0.01, mu_end=0.01,
            radius_start=1.0, radius_end=1.0,
        )
        return replace(self, ordering=ordering, convergence=convergence)

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "topology": self.topology,
            "neighborhood": self.neighborhood,
            "ordering": self.ordering.to_dict() if self.ordering else None,
            "convergence": self.convergence.to_dict() if self.convergence else None,
            "init": self.init,
            "seed": self.seed,
            "stop": self.stop,
            "epsilon": self.epsilon,
        }

    @staticmethod
    def from_dict(d: dict) -> "TrainingConfig":
        return TrainingConfig(
            grid=tuple(d.get("grid", (30, 30))),
            topology=d.get("topology", "rectangular"),
            neighborhood=d.get("neighborhood", "bubble"),
            ordering=PhaseSchedule.from_dict(d["ordering"]) if d.get("ordering") else None,
            convergence=PhaseSchedule.from_dict(d["convergence"]) if d.get("convergence") else None,
            init=d.get("init", "random-uniform"),
            seed=int(d.get("seed", 0)),
            stop=d.get("stop", "fixed-iterations"),
            epsilon=float(d.get("epsilon", 1e-6)),
        )


@dataclass
class BmuAssignment:
    """Best matching unit per record: cell index and winning distance."""

    record_ids: list[str]
    cells: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64)
        self.distances = np.asarray(self.distances, dtype=np.float64)
        if not (len(self.record_ids) == len(self.cells) == len(self.distances)):
            raise ValueError("assignment fields must have equal lengths")

    def __len__(self) -> int:
        return len(self.record_ids)

    def entries(self):
        for rid, cell, dist in zip(self.record_ids, self.cells, self.distances):
            yield rid, int(cell), float(dist)


@dataclass(frozen=True)
class SweepStats:
    sweep: int
    phase: str
    quantization_error: float
    max_weight_delta: float
    mu: float
    radius: float


@dataclass
class TrainingLog:
    sweeps: list[SweepStats]

    def __len__(self) -> int:
        return len(self.sweeps)

    def to_csv(self) -> str:
        lines = ["sweep,quantization_error,max_weight_delta,mu,radius"]
        for s in self.sweeps:
            lines.append(
                f"{s.sweep},{s.quantization_error!r},{s.max_weight_delta!r},"
                f"{s.mu!r},{s.radius!r}"
            )
        return "\n".join(lines) + "\n"


def _check_vector(x: np.ndarray, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise DataError(f"input vector has dimension {x.shape}, codebook expects ({dim},)")
    if not np.isfinite(x).all():
        raise NumericError("input vector contains non-finite components")
    return x


def _bmu_index(x: np.ndarray, weights: np.ndarray) -> tuple[int, float]:
    """Lowest-index argmin of squared Euclidean distance, plus the distance."""
    diff = weights - x
    sq = np.einsum("ij,ij->i", diff, diff)
    q = int(np.argmin(sq))
    return q, math.sqrt(float(sq[q]))


def _require_complete(data: EncodedMatrix) -> None:
    if data.missing.any():
        raise DataError("matrix has missing entries; impute before training")
    if not np.isfinite(data.values).all():
        raise NumericError("matrix contains non-finite values")


def init_codebook(
    data: EncodedMatrix,
    cfg: TrainingConfig,
    rng: np.random.Generator | None = None,
) -> Codebook:
    """Build the initial codebook.

    random-uniform draws each weight component uniformly inside the
    column's observed [min, max] (a zero-range column pins the component
    to that constant). linear lays the grid out across the two principal
    directions of the data, scaled by the square roots of the leading
    covariance eigenvalues.
    """
    _require_complete(data)
    n = data.values.shape[1]
    if n < 1:
        raise DataError("matrix must have at least one column")
    width, height = cfg.grid
    m = width * height
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)

    if cfg.init == "random-uniform":
        lo = data.values.min(axis=0)
        hi = data.values.max(axis=0)
        u = rng.random((m, n))
        weights = lo + u * (hi - lo)
    else:
        mean = data.values.mean(axis=0)
        centered = data.values - mean
        cov = centered.T @ centered / max(1, len(data.row_ids))
        eigvals, eigvecs = np.linalg.eigh(cov)
        # eigh returns ascending order; take the two leading directions.
        scale1 = math.sqrt(max(0.0, float(eigvals[-1])))
        dir1 = eigvecs[:, -1]
        if n >= 2:
            scale2 = math.sqrt(max(0.0, float(eigvals[-2])))
            dir2 = eigvecs[:, -2]
        else:
            scale2, dir2 = 0.0, np.zeros(n)
        ax = np.linspace(-1.0, 1.0, width) if width > 1 else np.zeros(1)
        ay = np.linspace(-1.0, 1.0, height) if height > 1 else np.zeros(1)
        weights = (
            mean
            + np.repeat(ay, width)[:, None] * scale2 * dir2
            + np.tile(ax, height)[:, None] * scale1 * dir1
        )

    return Codebook(width, height, weights, cfg.topology, list(data.col_names))


def find_bmu(x: np.ndarray, cb: Codebook) -> tuple[int, float]:
    """Cell index of the closest weight vector and its Euclidean distance;
    exact distance ties resolve to the lowest index."""
    x = _check_vector(x, cb.dim)
    return _bmu_index(x, cb.weights)


def neighborhood_weight(
    grid: Grid, q: int, i: int, radius: float, mu: float, kind: str = "bubble"
) -> float:
    """Update strength for neuron i when neuron q wins.

    bubble: mu inside the radius (grid distance <= radius), exactly 0
    outside. gaussian: mu * exp(-d^2 / (2 * radius^2)), degenerating to
    the zero-radius bubble when radius == 0.
    """
    if radius < 0:
        raise UsageError("radius must be non-negative")
    if not 0.0 < mu < 1.0:
        raise UsageError(f"mu must be in (0,1), got {mu}")
    d = grid.distance(q, i)
    if kind == "bubble":
        return mu if d <= radius else 0.0
    if kind == "gaussian":
        if radius == 0.0:
            return mu if d == 0.0 else 0.0
        return mu * math.exp(-(d * d) / (2.0 * radius * radius))
    raise UsageError(f"neighborhood kind must be one of {NEIGHBORHOODS}")


def update_step(
    cb: Codebook, x: np.ndarray, q: int, radius: float, mu: float,
    kind: str = "bubble",
) -> Codebook:
    """Pull neighborhood weights toward x in place; neurons receiving zero
    update strength keep bit-identical weights. Returns the codebook."""
    if not 0 <= q < cb.size:
        raise UsageError(f"cell index {q} outside grid of {cb.size} cells")
    x = _check_vector(x, cb.dim)
    gdist = cb.grid.distances_from(q)
    if kind == "bubble":
        sel = gdist <= radius
        cb.weights[sel] += mu * (x - cb.weights[sel])
    elif kind == "gaussian":
        if radius == 0.0:
            eta = np.where(gdist == 0.0, mu, 0.0)
        else:
            eta = mu * np.exp(-(gdist * gdist) / (2.0 * radius * radius))
        sel = eta > 0.0
        cb.weights[sel] += eta[sel, None] * (x - cb.weights[sel])
    else:
        raise UsageError(f"neighborhood kind must be one of {NEIGHBORHOODS}")
    return cb


def train(data: EncodedMatrix, cfg: TrainingConfig) -> tuple[Codebook, TrainingLog]:
    """Run the two-phase schedule over seeded shuffled sweeps.

    Each sweep presents every record once (the final sweep of a phase may
    be cut short by the iteration budget). The log holds one row per
    sweep: quantization error, the largest per-neuron weight displacement
    across the sweep, and the rate/radius at the sweep's first
    presentation. With stop="weight-delta", training ends early once that
    displacement falls below epsilon.
    """
    _require_complete(data)
    n_records = len(data.row_ids)
    if n_records == 0:
        raise DataError("cannot train on an empty matrix")
    cfg = cfg.resolved(n_records)
    rng = np.random.default_rng(cfg.seed)
    cb = init_codebook(data, cfg, rng=rng)

    X = data.values
    # Sweep 0 records the untrained state so logs expose the starting error.
    sweeps: list[SweepStats] = [SweepStats(
        sweep=0,
        phase="init",
        quantization_error=quantization_error(data, cb),
        max_weight_delta=0.0,
        mu=cfg.ordering.mu_start,
        radius=cfg.ordering.radius_start,
    )]
    sweep_no = 0
    stopped = False
    for phase_name, sched in (("ordering", cfg.ordering), ("convergence", cfg.convergence)):
        k = 0
        while k < sched.iterations and not stopped:
            order = rng.permutation(n_records)
            before = cb.weights.copy()
            sweep_mu, sweep_radius = sched.at(k)
            steps = min(n_records, sched.iterations - k)
            for s in range(steps):
                x = X[order[s]]
                mu, radius = sched.at(k)
                q, _ = _bmu_index(x, cb.weights)
                update_step(cb, x, q, radius, mu, cfg.neighborhood)
                k += 1
            delta = float(np.sqrt(((cb.weights - before) ** 2).sum(axis=1)).max())
            sweep_no += 1
            sweeps.append(SweepStats(
                sweep=sweep_no,
                phase=phase_name,
                quantization_error=quantization_error(data, cb),
                max_weight_delta=delta,
                mu=sweep_mu,
                radius=sweep_radius,
            ))
            if cfg.stop == "weight-delta" and delta < cfg.epsilon:
                stopped = True
    return cb, TrainingLog(sweeps)


def assign_bmus(data: EncodedMatrix, cb: Codebook) -> BmuAssignment:
    """Best matching unit for every record; deterministic."""
    _require_complete(data)
    cells = np.empty(len(data.row_ids), dtype=np.int64)
    dists = np.empty(len(data.row_ids), dtype=np.float64)
    for i in range(len(data.row_ids)):
        cells[i], dists[i] = _bmu_index(data.values[i], cb.weights)
    return BmuAssignment(list(data.row_ids), cells, dists)


def quantization_error(data: EncodedMatrix, cb: Codebook) -> float:
    """Mean record-to-BMU Euclidean distance."""
    if len(data.row_ids) == 0:
        raise DataError("quantization error of an empty matrix is undefined")
    return float(np.mean(assign_bmus(data, cb).distances))


def topographic_error(data: EncodedMatrix, cb: Codebook) -> float:
    """Fraction of records whose best and second-best units are not
    grid-adjacent (4-neighborhood on rectangular grids, 6 on hexagonal).
    A single-cell map has no topology to violate and scores 0."""
    if len(data.row_ids) == 0:
        raise DataError("topographic error of an empty matrix is undefined")
    if cb.size == 1:
        return 0.0
    _require_complete(data)
    g = cb.grid
    bad = 0
    for i in range(len(data.row_ids)):
        diff = cb.weights - data.values[i]
        sq = np.einsum("ij,ij->i", diff, diff)
        q1 = int(np.argmin(sq))
        sq[q1] = np.inf
        q2 = int(np.argmin(sq))
        if not g.are_adjacent(q1, q2):
            bad += 1
    return bad / len(data.row_ids)


def save_codebook(
    cb: Codebook,
    path: str | Path,
    config: TrainingConfig | None = None,
    metrics: dict | None = None,
) -> None:
    """Persist as JSON: grid, topology, column names, row-major weights,
    optional training config and final metrics."""
    doc = {
        "width": cb.width,
        "height": cb.height,
        "topology": cb.topology,
        "col_names": list(cb.col_names),
        "weights": [[float(v) for v in row] for row in cb.weights],
        "config": config.to_dict() if config else None,
        "metrics": metrics or {},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_codebook(path: str | Path) -> Codebook:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return Codebook(
        width=int(doc["width"]),
        height=int(doc["height"]),
        weights=np.asarray(doc["weights"], dtype=np.float64),
        topology=doc.get("topology", "rectangular"),
        col_names=list(doc.get("col_names", [])),
    )


def save_assignment(assign: BmuAssignment, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "cell", "distance"])
        for rid, cell, dist in assign.entries():
            writer.writerow([rid, cell, repr(dist)])


def load_assignment(path: str | Path) -> BmuAssignment:
    rids: list[str] = []
    cells: list[int] = []
    dists: list[float] = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["record_id", "cell", "distance"]:
            raise DataError(f"{path}: not an assignment file (header {header})")
        for row in reader:
            rids.append(row[0])
            cells.append(int(row[1]))
            dists.append(float(row[2]))
    return BmuAssignment(rids, np.asarray(cells), np.asarray(dists))
