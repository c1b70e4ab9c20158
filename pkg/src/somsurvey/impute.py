"""K-nearest-neighbor imputation for the encoded survey matrix.

Distances between two vectors use only jointly-observed coordinates and
are rescaled by (total dims / observed dims) before the square root, so
sparsely-overlapping pairs are not rewarded for comparing fewer numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImputeError, UsageError
from .ingest import EncodedMatrix

AGGREGATIONS = ("nearest", "mean", "median")


@dataclass(frozen=True)
class ImputeConfig:
    """Imputation parameters.

    axis="rows" treats other records as neighbor candidates, axis="columns"
    treats other variables. aggregation=None resolves to "nearest" for k=1
    and "mean" otherwise.
    """

    k: int = 1
    axis: str = "rows"
    aggregation: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise UsageError(f"k must be >= 1, got {self.k}")
        if self.axis not in ("rows", "columns"):
            raise UsageError(f"axis must be 'rows' or 'columns', got {self.axis!r}")
        if self.aggregation is not None and self.aggregation not in AGGREGATIONS:
            raise UsageError(f"aggregation must be one of {AGGREGATIONS}")

    def resolved_aggregation(self) -> str:
        if self.aggregation is not None:
            return self.aggregation
        return "nearest" if self.k == 1 else "mean"

    def to_dict(self) -> dict:
        return {"k": self.k, "axis": self.axis, "aggregation": self.aggregation}

    @staticmethod
    def from_dict(d: dict) -> "ImputeConfig":
        return ImputeConfig(
            k=int(d.get("k", 1)),
            axis=d.get("axis", "rows"),
            aggregation=d.get("aggregation"),
        )


def knn_impute(m: EncodedMatrix, cfg: ImputeConfig | None = None) -> EncodedMatrix:
    """Fill every masked entry from the k nearest neighbor vectors.

    Observed entries pass through bit-identical. For each vector holding a
    missing entry, candidate neighbors are ranked by the rescaled partial
    Euclidean distance (ties broken by lowest index); for each missing
    coordinate the k nearest neighbors observed there supply the fill
    value via the configured aggregation. Raises :class:`ImputeError` for
    all-missing vectors or vectors with no comparable neighbor.
    """
    cfg = cfg or ImputeConfig()
    if not m.missing.any():
        return m.copy()

    values = m.values.copy()
    mask = m.missing.copy()
    transposed = cfg.axis == "columns"
    if transposed:
        values = values.T.copy()
        mask = mask.T.copy()
        labels = list(m.col_names)
        unit = "column"
    else:
        labels = list(m.row_ids)
        unit = "row"

    n_vec, n_dim = values.shape
    if cfg.k >= n_vec:
        raise UsageError(
            f"k={cfg.k} needs at least {cfg.k + 1} {unit}s, matrix has {n_vec}"
        )
    aggregation = cfg.resolved_aggregation()

    observed = ~mask
    filled = values.copy()
    zeroed = np.where(observed, values, 0.0)

    for i in np.flatnonzero(mask.any(axis=1)):
        obs_i = observed[i]
        if not obs_i.any():
            raise ImputeError(f"{unit} {labels[i]!r} has no observed entries")

        # Rescaled partial distance from vector i to every other vector.
        shared = observed & obs_i  # (n_vec, n_dim)
        diff = zeroed - zeroed[i]
        sq = np.where(shared, diff * diff, 0.0).sum(axis=1)
        n_shared = shared.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.sqrt(sq * (n_dim / n_shared))
        dist[n_shared == 0] = np.inf
        dist[i] = np.inf

        if not np.isfinite(dist).any():
            raise ImputeError(
                f"{unit} {labels[i]!r} shares no observed coordinates with any other {unit}"
            )

        # Stable sort keeps the lowest-index-first tie-break.
        order = np.argsort(dist, kind="stable")

        for j in np.flatnonzero(mask[i]):
            donors = []
            for cand in order:
                if not np.isfinite(dist[cand]):
                    break
                if observed[cand, j]:
                    donors.append(values[cand, j])
                    if len(donors) == cfg.k:
                        break
            if not donors:
                raise ImputeError(
                    f"no comparable neighbor observed at coordinate {j} "
                    f"for {unit} {labels[i]!r}"
                )
            if aggregation == "nearest":
                filled[i, j] = donors[0]
            elif aggregation == "mean":
                filled[i, j] = float(np.mean(donors))
            else:
                filled[i, j] = float(np.median(donors))

    if transposed:
        filled = filled.T.copy()
    return EncodedMatrix(
        filled,
        np.zeros_like(m.missing),
        list(m.row_ids),
        list(m.col_names),
    )
