"""Seeded synthetic survey generator.

Emits survey CSVs in the ingest format together with a ground-truth
sidecar naming each record's cluster. Records are split across clusters
by exact apportionment; factor responses draw from per-cluster level
distributions. Inter-factor correlation is planted through a shared
per-record "diligence" score: correlated factors mix the score with
per-factor noise and threshold the result into Likert levels through the
factor's marginal distribution, with the latent correlation boosted to
offset the attenuation that discretization causes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np

from .errors import UsageError
from .ingest import LIKERT_LEVELS

_STD_NORMAL = NormalDist()

#: Maximum latent correlation the shared-score mechanism can plant.
_MAX_LATENT = 0.99


def _check_distribution(probs, what: str) -> tuple[float, ...]:
    p = tuple(float(x) for x in probs)
    if any(x < 0 for x in p):
        raise UsageError(f"{what}: probabilities must be non-negative")
    if abs(sum(p) - 1.0) > 1e-9:
        raise UsageError(f"{what}: probabilities must sum to 1, got {sum(p)}")
    return p


@dataclass(frozen=True)
class ClusterSpec:
    """One record cluster: sampling weight plus per-factor level
    distributions (5 probabilities for levels 1..5); factors not listed
    fall back to ``default``."""

    name: str
    weight: float
    distributions: dict[str, tuple[float, ...]] = field(default_factory=dict)
    default: tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)

    def distribution_for(self, factor: str) -> tuple[float, ...]:
        return self.distributions.get(factor, self.default)


@dataclass(frozen=True)
class CorrelationTarget:
    factor_a: str
    factor_b: str
    rho: float


@dataclass(frozen=True)
class SynthSpec:
    records: int
    factor_names: tuple[str, ...]
    clusters: tuple[ClusterSpec, ...]
    correlations: tuple[CorrelationTarget, ...] = ()
    missingness: float = 0.0
    demographics: dict[str, dict[str, float]] = field(default_factory=dict)
    include_age: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.records < 1:
            raise UsageError("records must be >= 1")
        if not self.factor_names:
            raise UsageError("at least one factor is required")
        if len(set(self.factor_names)) != len(self.factor_names):
            raise UsageError("factor names must be unique")
        if not self.clusters:
            raise UsageError("at least one cluster is required")
        if not 0.0 <= self.missingness < 1.0:
            raise UsageError(f"missingness must be in [0,1), got {self.missingness}")
        weights = [c.weight for c in self.clusters]
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise UsageError("cluster weights must be non-negative and sum to 1")
        for c in self.clusters:
            _check_distribution(c.default, f"cluster {c.name!r} default")
            for f, dist in c.distributions.items():
                if f not in self.factor_names:
                    raise UsageError(f"cluster {c.name!r} references unknown factor {f!r}")
                if len(dist) != len(LIKERT_LEVELS):
                    raise UsageError(f"cluster {c.name!r} factor {f!r}: need 5 probabilities")
                _check_distribution(dist, f"cluster {c.name!r} factor {f!r}")
        for name, dist in self.demographics.items():
            _check_distribution(dist.values(), f"demographic {name!r}")


def default_demographics() -> dict[str, dict[str, float]]:
    """Gender split 45/55 and an education mix with 91% holding some
    qualification."""
    return {
        "gender": {"male": 0.45, "female": 0.55},
        "education": {"none": 0.09, "secondary": 0.41, "higher": 0.50},
    }


def _apportion(weights: list[float], n: int) -> list[int]:
    """Largest-remainder apportionment; deterministic, sums to n."""
    raw = [w * n for w in weights]
    counts = [int(math.floor(x)) for x in raw]
    remainder = n - sum(counts)
    by_frac = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in by_frac[:remainder]:
        counts[i] += 1
    return counts


def _discretization_attenuation(dist: tuple[float, ...]) -> float:
    """Correlation between a standard normal score and its thresholded
    Likert level; the factor by which discretizing shrinks a planted
    latent correlation."""
    levels = np.arange(1, len(dist) + 1, dtype=np.float64)
    p = np.asarray(dist, dtype=np.float64)
    mean = float((p * levels).sum())
    var = float((p * levels * levels).sum() - mean * mean)
    if var <= 0.0:
        return 0.0
    cum = np.cumsum(p)
    # pdf at the interior thresholds; 0 at +/- infinity.
    pdf_at = [0.0]
    for c in cum[:-1]:
        c = min(max(c, 0.0), 1.0)
        pdf_at.append(_STD_NORMAL.pdf(_STD_NORMAL.inv_cdf(c)) if 0.0 < c < 1.0 else 0.0)
    pdf_at.append(0.0)
    cov = float(sum(l * (pdf_at[i] - pdf_at[i + 1]) for i, l in enumerate(levels)))
    return cov / math.sqrt(var)


def _resolve_loadings(spec: SynthSpec) -> dict[str, float]:
    """Per-factor weight on the shared diligence score, raising
    :class:`UsageError` for targets the mechanism cannot realize."""
    loadings = {f: 0.0 for f in spec.factor_names}
    used: set[str] = set()
    for tgt in spec.correlations:
        for f in (tgt.factor_a, tgt.factor_b):
            if f not in spec.factor_names:
                raise UsageError(f"correlation target references unknown factor {f!r}")
            if f in used:
                raise UsageError(
                    f"factor {f!r} appears in more than one correlation target; "
                    "targets must be disjoint pairs"
                )
            used.add(f)
        if tgt.factor_a == tgt.factor_b:
            raise UsageError("correlation target needs two distinct factors")
        if not 0.0 <= tgt.rho < 1.0:
            raise UsageError(
                f"infeasible correlation target rho={tgt.rho}: the shared-score "
                "mechanism plants correlations in [0, 1) only"
            )
        dists = {}
        for f in (tgt.factor_a, tgt.factor_b):
            per_cluster = {spec.clusters[0].distribution_for(f)}
            for c in spec.clusters[1:]:
                per_cluster.add(c.distribution_for(f))
            if len(per_cluster) > 1:
                raise UsageError(
                    f"infeasible correlation target: factor {f!r} has cluster-dependent "
                    "distributions, which would distort the planted correlation"
                )
            dists[f] = per_cluster.pop()
        atten_a = _discretization_attenuation(dists[tgt.factor_a])
        atten_b = _discretization_attenuation(dists[tgt.factor_b])
        if atten_a <= 0.0 or atten_b <= 0.0:
            raise UsageError(
                "infeasible correlation target: a degenerate level distribution "
                "leaves no variance to correlate"
            )
        latent = tgt.rho / (atten_a * atten_b)
        if latent > _MAX_LATENT:
            raise UsageError(
                f"infeasible correlation target rho={tgt.rho}: discretization "
                f"attenuation would require a latent correlation of {latent:.3f}"
            )
        loadings[tgt.factor_a] = math.sqrt(latent)
        loadings[tgt.factor_b] = math.sqrt(latent)
    return loadings


def _sample_categorical(rng: np.random.Generator, cum: np.ndarray, n: int) -> np.ndarray:
    """Levels 1..len(cum) drawn by inverse-CDF lookup."""
    u = rng.random(n)
    return np.searchsorted(cum, u, side="left") + 1


def generate_synthetic(
    spec: SynthSpec,
    path: str | Path,
    truth_path: str | Path | None = None,
) -> tuple[Path, Path]:
    """Write the survey CSV and its cluster ground-truth sidecar.

    Column layout: id, optional demographic columns (age plus the
    categorical distributions), then one column per factor holding Likert
    tokens; the requested fraction of factor cells is blanked. Returns
    (csv_path, truth_path).
    """
    loadings = _resolve_loadings(spec)  # validates targets before any output
    path = Path(path)
    truth_path = Path(truth_path) if truth_path else path.with_suffix(".truth.csv")

    rng = np.random.default_rng(spec.seed)
    n = spec.records

    counts = _apportion([c.weight for c in spec.clusters], n)
    membership = np.repeat(np.arange(len(spec.clusters)), counts)
    rng.shuffle(membership)

    demo_cols: dict[str, list[str]] = {}
    if spec.include_age:
        ages = np.clip(np.rint(rng.normal(47.0, 13.0, n)), 18, 90).astype(int)
        demo_cols["age"] = [str(a) for a in ages]
    for name, dist in spec.demographics.items():
        tokens = list(dist.keys())
        tok_counts = _apportion([dist[t] for t in tokens], n)
        column = np.repeat(np.arange(len(tokens)), tok_counts)
        rng.shuffle(column)
        demo_cols[name] = [tokens[i] for i in column]

    diligence = rng.standard_normal(n)
    levels = np.empty((n, len(spec.factor_names)), dtype=np.int64)
    for j, factor in enumerate(spec.factor_names):
        lam = loadings[factor]
        if lam > 0.0:
            noise = rng.standard_normal(n)
            score = lam * diligence + math.sqrt(1.0 - lam * lam) * noise
            u = np.array([_STD_NORMAL.cdf(s) for s in score])
            cum = np.cumsum(spec.clusters[0].distribution_for(factor))
            levels[:, j] = np.searchsorted(cum, u, side="left") + 1
        else:
            for ci, cluster in enumerate(spec.clusters):
                idx = np.flatnonzero(membership == ci)
                cum = np.cumsum(cluster.distribution_for(factor))
                levels[idx, j] = _sample_categorical(rng, cum, len(idx))
        np.clip(levels[:, j], 1, len(LIKERT_LEVELS), out=levels[:, j])

    blank = rng.random((n, len(spec.factor_names))) < spec.missingness

    id_width = len(str(n))
    ids = [f"p{i + 1:0{id_width}d}" for i in range(n)]

    header = ["id"] + list(demo_cols.keys()) + list(spec.factor_names)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(n):
            row = [ids[i]] + [demo_cols[name][i] for name in demo_cols]
            for j in range(len(spec.factor_names)):
                row.append("" if blank[i, j] else LIKERT_LEVELS[levels[i, j] - 1])
            writer.writerow(row)

    with truth_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "cluster"])
        for i in range(n):
            writer.writerow([ids[i], spec.clusters[membership[i]].name])

    return path, truth_path


def demo_spec(
    records: int = 611,
    n_factors: int = 15,
    seed: int = 7,
    missingness: float = 0.05,
    correlated_pair_rho: float = 0.8,
) -> SynthSpec:
    """Four well-separated behavior clusters over generic factors, with one
    correlated factor pair riding on the shared diligence score.

    Clusters: consistently high raters, consistently low raters, and two
    mixed profiles split across the factor list. The correlated pair (the
    two factors after the midpoint) keeps a cluster-independent marginal
    so the planted correlation is undistorted by cluster structure.
    """
    if n_factors < 4:
        raise UsageError("demo spec needs at least 4 factors")
    factors = tuple(f"factor_{i + 1:02d}" for i in range(n_factors))
    half = n_factors // 2
    pair = (factors[half], factors[(half + 1) % n_factors])

    high = (0.01, 0.01, 0.03, 0.10, 0.85)
    low = (0.85, 0.10, 0.03, 0.01, 0.01)
    flat = (0.10, 0.20, 0.40, 0.20, 0.10)

    def profile(first_half, second_half):
        dists = {}
        for i, f in enumerate(factors):
            if f in pair:
                dists[f] = flat
            else:
                dists[f] = first_half if i < half else second_half
        return dists

    clusters = (
        ClusterSpec("high", 0.30, profile(high, high)),
        ClusterSpec("low", 0.30, profile(low, low)),
        ClusterSpec("mixed_a", 0.20, profile(high, low)),
        ClusterSpec("mixed_b", 0.20, profile(low, high)),
    )
    correlations = (
        (CorrelationTarget(pair[0], pair[1], correlated_pair_rho),)
        if correlated_pair_rho > 0 else ()
    )
    return SynthSpec(
        records=records,
        factor_names=factors,
        clusters=clusters,
        correlations=correlations,
        missingness=missingness,
        demographics=default_demographics(),
        seed=seed,
    )


def spec_from_dict(d: dict) -> SynthSpec:
    """Build a SynthSpec from parsed JSON (the CLI's --spec file)."""
    factor_names = tuple(d.get("factors") or
                         (f"factor_{i + 1:02d}" for i in range(int(d.get("factor_count", 0)))))
    clusters = tuple(
        ClusterSpec(
            name=c["name"],
            weight=float(c["weight"]),
            distributions={f: tuple(p) for f, p in c.get("distributions", {}).items()},
            default=tuple(c.get("default", (0.2, 0.2, 0.2, 0.2, 0.2))),
        )
        for c in d["clusters"]
    )
    correlations = tuple(
        CorrelationTarget(t["factor_a"], t["factor_b"], float(t["rho"]))
        for t in d.get("correlations", ())
    )
    demographics = {
        name: {tok: float(p) for tok, p in dist.items()}
        for name, dist in d.get("demographics", default_demographics()).items()
    }
    return SynthSpec(
        records=int(d["records"]),
        factor_names=factor_names,
        clusters=clusters,
        correlations=correlations,
        missingness=float(d.get("missingness", 0.0)),
        demographics=demographics,
        include_age=bool(d.get("include_age", True)),
        seed=int(d.get("seed", 0)),
    )
