"""Independent brute-force reference implementations used as test oracles.

Everything here is deliberately written as plain Python loops, separate
from the library's vectorized code paths.
"""

from __future__ import annotations

import math


def exhaustive_bmu(x, weights) -> tuple[int, float]:
    """Scan every neuron; keep the strictly smaller squared distance, so
    ties resolve to the lowest index."""
    best_q = -1
    best_sq = math.inf
    for q in range(len(weights)):
        sq = 0.0
        for a, b in zip(weights[q], x):
            d = float(a) - float(b)
            sq += d * d
        if sq < best_sq:
            best_sq = sq
            best_q = q
    return best_q, math.sqrt(best_sq)


def partial_distance(a_vals, a_obs, b_vals, b_obs) -> float:
    """Rescaled Euclidean distance over jointly-observed coordinates;
    infinity when no coordinate is shared."""
    n = len(a_vals)
    sq = 0.0
    shared = 0
    for j in range(n):
        if a_obs[j] and b_obs[j]:
            d = float(a_vals[j]) - float(b_vals[j])
            sq += d * d
            shared += 1
    if shared == 0:
        return math.inf
    return math.sqrt(sq * n / shared)


def exhaustive_knn_impute(values, mask, k=1, aggregation="nearest"):
    """All-pairs nearest-neighbor imputation over rows.

    For each row with gaps: rank all other rows by partial distance
    (ties to the lowest row index), then fill each gap from the k nearest
    rows observed at that column. Returns a new nested list.
    """
    n_rows = len(values)
    n_cols = len(values[0]) if n_rows else 0
    observed = [[not mask[i][j] for j in range(n_cols)] for i in range(n_rows)]
    out = [[float(values[i][j]) for j in range(n_cols)] for i in range(n_rows)]

    for i in range(n_rows):
        if all(observed[i]):
            continue
        ranked = []
        for other in range(n_rows):
            if other == i:
                continue
            d = partial_distance(values[i], observed[i], values[other], observed[other])
            if d < math.inf:
                ranked.append((d, other))
        ranked.sort(key=lambda t: (t[0], t[1]))
        for j in range(n_cols):
            if observed[i][j]:
                continue
            donors = []
            for _, other in ranked:
                if observed[other][j]:
                    donors.append(float(values[other][j]))
                    if len(donors) == k:
                        break
            assert donors, f"oracle: no donor for row {i} col {j}"
            if aggregation == "nearest":
                out[i][j] = donors[0]
            elif aggregation == "mean":
                out[i][j] = sum(donors) / len(donors)
            else:
                donors_sorted = sorted(donors)
                mid = len(donors_sorted) // 2
                if len(donors_sorted) % 2:
                    out[i][j] = donors_sorted[mid]
                else:
                    out[i][j] = (donors_sorted[mid - 1] + donors_sorted[mid]) / 2.0
    return out


def pairwise_groups(record_ids, cells, coords, radius):
    """O(R^2) record-level union-find over BMU grid distance."""
    n = len(record_ids)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for i in range(n):
        for j in range(i + 1, n):
            xa, ya = coords[cells[i]]
            xb, yb = coords[cells[j]]
            if math.hypot(xa - xb, ya - yb) <= radius:
                union(i, j)

    groups: dict[int, list[str]] = {}
    order = []
    for i in range(n):
        root = find(i)
        if root not in groups:
            groups[root] = []
            order.append(root)
        groups[root].append(record_ids[i])
    return [groups[r] for r in order]


def principal_axis_2x2(xs, ys):
    """Leading eigenvector/eigenvalue of the 2x2 covariance, closed form."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs) / n
    syy = sum((y - my) ** 2 for y in ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
    # Eigenvalues of [[sxx, sxy], [sxy, syy]] by the quadratic formula.
    tr = sxx + syy
    det = sxx * syy - sxy * sxy
    disc = math.sqrt(max(0.0, tr * tr / 4.0 - det))
    lam1 = tr / 2.0 + disc
    if abs(sxy) > 1e-15:
        v = (lam1 - syy, sxy)
    elif sxx >= syy:
        v = (1.0, 0.0)
    else:
        v = (0.0, 1.0)
    norm = math.hypot(*v)
    return (v[0] / norm, v[1] / norm), lam1


def lerp_channel(a: int, b: int, t: float) -> int:
    return int(a + (b - a) * t + 0.5)


def pearson(xs, ys) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)
