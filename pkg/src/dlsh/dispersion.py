"""Dispersion statistics: near-pair counts, graph packing, doubling dimension.

The central quantity is the number of unordered point pairs within a
distance threshold. Counts are exact; the grid-bucketed accelerator
enumerates a superset of candidate pairs and applies the same distance
arithmetic as the quadratic reference path, so the two agree pair for
pair.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Dataset, Metric

_BLOCK = 512


@dataclass(frozen=True)
class DispersionProfile:
    """Near-pair counts over an ascending grid of threshold multipliers.

    ``counts[i]`` is the number of unordered pairs (i < j, self-pairs
    excluded) at distance <= ``betas[i] * r``.
    """

    r: float
    betas: tuple[float, ...]
    counts: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if self.r <= 0:
            raise ValueError("base radius r must be positive")
        if len(self.betas) == 0:
            raise ValueError("profile needs at least one beta")
        if len(self.betas) != len(self.counts):
            raise ValueError("betas and counts length mismatch")
        if any(b <= 0 for b in self.betas):
            raise ValueError("betas must be positive")
        if any(b2 <= b1 for b1, b2 in zip(self.betas, self.betas[1:])):
            raise ValueError("betas must be strictly ascending")
        if any(c2 < c1 for c1, c2 in zip(self.counts, self.counts[1:])):
            raise ValueError("counts must be nondecreasing")
        cap = self.n * (self.n - 1) // 2
        if any(c < 0 or c > cap for c in self.counts):
            raise ValueError("counts must lie in [0, n(n-1)/2]")


@dataclass(frozen=True)
class PackedGraph:
    """Output of the degree-ordered shrinking pass over a graph.

    ``representatives`` is an independent set T; ``assignment`` maps
    every vertex to its representative (itself for members of T);
    ``multiplicities`` gives the group size n_u for each u in T.
    """

    representatives: frozenset[int]
    assignment: np.ndarray
    multiplicities: dict[int, int]
    edge_count: int


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    reason: str = "ok"

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class DoublingEstimate:
    d0: float
    method: str  # "net_counting" or "exact_tiny"
    scales_used: int


# ---------------------------------------------------------------------------
# near-pair counting


def _block_near(a: np.ndarray, b: np.ndarray | None, metric: Metric):
    """Distance measure between rows of ``a`` and ``b`` (or within ``a``).

    Returns squared distances for L2 and plain distances for L1; both
    counting paths share this helper so borderline pairs are resolved
    identically.
    """
    if b is None:
        b = a
    if metric is Metric.L2:
        sa = np.einsum("ij,ij->i", a, a)
        sb = np.einsum("ij,ij->i", b, b)
        d2 = sa[:, None] + sb[None, :] - 2.0 * (a @ b.T)
        return d2
    return np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2)


def _threshold(metric: Metric, t: float) -> float:
    return t * t if metric is Metric.L2 else t


def count_near_pairs(
    ds: Dataset, beta: float, r: float, method: str = "auto"
) -> int:
    """Exact number of unordered pairs {i < j} with distance <= beta * r."""
    if beta <= 0 or r <= 0:
        raise ValueError("beta and r must be positive")
    if method not in ("auto", "reference", "grid"):
        raise ValueError(f"unknown counting method {method!r}")
    if method == "grid" or (method == "auto" and ds.dim <= 3 and ds.n > 2048):
        return _count_grid(ds, beta * r)
    return int(profile(ds, r, [beta]).counts[0])


def profile(ds: Dataset, r: float, betas) -> DispersionProfile:
    """Near-pair counts at every ``beta`` in an ascending grid."""
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("beta grid must be nonempty")
    thr = np.array([_threshold(ds.metric, b * r) for b in betas])
    if np.any(np.diff(thr) <= 0) and len(thr) > 1:
        raise ValueError("betas must be strictly ascending")
    X = ds.points
    n = ds.n
    hist = np.zeros(len(betas) + 1, dtype=np.int64)
    for i0 in range(0, n, _BLOCK):
        ai = X[i0 : i0 + _BLOCK]
        # diagonal block: strict upper triangle only
        d_ii = _block_near(ai, None, ds.metric)
        iu = np.triu_indices(ai.shape[0], k=1)
        pos = np.searchsorted(thr, d_ii[iu], side="left")
        hist += np.bincount(pos, minlength=len(betas) + 1)
        for j0 in range(i0 + _BLOCK, n, _BLOCK):
            d_ij = _block_near(ai, X[j0 : j0 + _BLOCK], ds.metric)
            pos = np.searchsorted(thr, d_ij.ravel(), side="left")
            hist += np.bincount(pos, minlength=len(betas) + 1)
    counts = np.cumsum(hist[:-1])
    return DispersionProfile(
        r=float(r), betas=tuple(betas), counts=tuple(int(c) for c in counts), n=n
    )


def _count_grid(ds: Dataset, t: float) -> int:
    """Grid-bucketed exact count: cells of side t, neighbor cells only."""
    X = ds.points
    thr = _threshold(ds.metric, t)
    cells: dict[tuple[int, ...], list[int]] = {}
    keys = np.floor(X / t).astype(np.int64)
    for idx, key in enumerate(map(tuple, keys)):
        cells.setdefault(key, []).append(idx)
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=ds.dim)]
    total = 0
    for key, members in cells.items():
        a = X[members]
        d_ii = _block_near(a, None, ds.metric)
        iu = np.triu_indices(len(members), k=1)
        total += int(np.count_nonzero(d_ii[iu] <= thr))
        for off in offsets:
            nb = tuple(k + o for k, o in zip(key, off))
            if nb <= key or nb not in cells:
                continue  # each unordered cell pair visited once
            b = X[cells[nb]]
            d_ij = _block_near(a, b, ds.metric)
            total += int(np.count_nonzero(d_ij <= thr))
    return total


def near_graph(ds: Dataset, beta: float, r: float) -> list[tuple[int, int]]:
    """Edges (i, j), i < j, for every pair at distance <= beta * r."""
    if beta <= 0 or r <= 0:
        raise ValueError("beta and r must be positive")
    thr = _threshold(ds.metric, beta * r)
    X = ds.points
    n = ds.n
    edges: list[tuple[int, int]] = []
    for i0 in range(0, n, _BLOCK):
        ai = X[i0 : i0 + _BLOCK]
        d_ii = _block_near(ai, None, ds.metric)
        ii, jj = np.nonzero(np.triu(d_ii <= thr, k=1))
        edges.extend(zip((ii + i0).tolist(), (jj + i0).tolist()))
        for j0 in range(i0 + _BLOCK, n, _BLOCK):
            d_ij = _block_near(ai, X[j0 : j0 + _BLOCK], ds.metric)
            ii, jj = np.nonzero(d_ij <= thr)
            edges.extend(zip((ii + i0).tolist(), (jj + j0).tolist()))
    return edges


# ---------------------------------------------------------------------------
# dispersion summary


def c_epsilon(p: DispersionProfile, eps: float) -> float | None:
    """Largest profiled beta whose near-pair count stays below n^(1+eps).

    Returns ``math.inf`` when even the largest profiled beta qualifies
    (the grid does not bound the statistic), and ``None`` when no
    profiled beta qualifies at all.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    threshold = p.n ** (1.0 + eps)
    best = None
    for beta, count in zip(p.betas, p.counts):
        if count < threshold:
            best = beta
    if best is None:
        return None
    if best == p.betas[-1]:
        return math.inf
    return best


def write_profile_csv(p: DispersionProfile, fh) -> None:
    fh.write("beta,n_beta,n,r\r\n")
    for beta, count in zip(p.betas, p.counts):
        fh.write(f"{beta!r},{count},{p.n},{p.r!r}\r\n")


# ---------------------------------------------------------------------------
# graph packing


def _validate_edges(n: int, edges) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop at vertex {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        key = (i, j) if i < j else (j, i)
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    return out


def pack_graph(n: int, edges) -> PackedGraph:
    """Degree-ordered shrinking: pick an independent representative set T
    and attach every remaining vertex to an adjacent representative.

    Vertices are processed in ascending order of original degree (ties
    by index); a vertex attaches to the minimum-degree representative
    among its processed neighbors (ties by index) or becomes a
    representative itself. The resulting groups satisfy
    sum_u C(n_u, 2) <= |E|.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    edge_list = _validate_edges(n, edges)
    adj: list[list[int]] = [[] for _ in range(n)]
    deg = [0] * n
    for i, j in edge_list:
        adj[i].append(j)
        adj[j].append(i)
        deg[i] += 1
        deg[j] += 1
    order = sorted(range(n), key=lambda v: (deg[v], v))
    in_t = [False] * n
    assignment = np.arange(n, dtype=np.int64)
    reps: list[int] = []
    for v in order:
        best = -1
        for u in adj[v]:
            if in_t[u] and (best < 0 or (deg[u], u) < (deg[best], best)):
                best = u
        if best >= 0:
            assignment[v] = best
        else:
            in_t[v] = True
            reps.append(v)
    mult = {u: 0 for u in reps}
    for v in range(n):
        mult[int(assignment[v])] += 1
    return PackedGraph(
        representatives=frozenset(reps),
        assignment=assignment,
        multiplicities=mult,
        edge_count=len(edge_list),
    )


def verify_packing(g: PackedGraph, edges) -> CheckResult:
    """Check the three structural conditions on a packed graph."""
    n = len(g.assignment)
    edge_set = {(min(i, j), max(i, j)) for i, j in edges}
    T = g.representatives
    for u in T:
        if int(g.assignment[u]) != u:
            return CheckResult(False, f"representative {u} not mapped to itself")
    for v in range(n):
        u = int(g.assignment[v])
        if u not in T:
            return CheckResult(False, f"vertex {v} assigned to non-representative {u}")
        if v not in T and (min(v, u), max(v, u)) not in edge_set:
            return CheckResult(False, f"assignment ({v}->{u}) is not an edge")
    for i, j in edge_set:
        if i in T and j in T:
            return CheckResult(False, f"edge ({i},{j}) joins two representatives")
    mult = {u: 0 for u in T}
    for v in range(n):
        mult[int(g.assignment[v])] += 1
    if mult != g.multiplicities:
        return CheckResult(False, "stored multiplicities disagree with assignment")
    if sum(mult.values()) != n:
        return CheckResult(False, "multiplicities do not sum to n")
    budget = sum(m * (m - 1) // 2 for m in mult.values())
    if budget > len(edge_set):
        return CheckResult(False, f"pair budget {budget} exceeds |E|={len(edge_set)}")
    return CheckResult(True)


def save_edges(edges, path) -> None:
    with open(path, "w", newline="") as fh:
        for i, j in edges:
            if i >= j:
                raise ValueError(f"edge ({i},{j}) must satisfy i < j")
            fh.write(f"{i},{j}\n")


def load_edges(path) -> list[tuple[int, int]]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            i_s, j_s = line.split(",")
            i, j = int(i_s), int(j_s)
        except ValueError as exc:
            raise ValueError(f"bad edge at line {lineno}: {line!r}") from exc
        if i >= j:
            raise ValueError(f"edge at line {lineno} must satisfy i < j")
        out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# doubling dimension


def _dists_to(X: np.ndarray, p: np.ndarray, metric: Metric) -> np.ndarray:
    diff = X - p
    if metric is Metric.L2:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return np.abs(diff).sum(axis=1)


def _diameter(ds: Dataset) -> float:
    best = 0.0
    X = ds.points
    for i0 in range(0, ds.n, _BLOCK):
        d = _block_near(X[i0 : i0 + _BLOCK], X, ds.metric)
        best = max(best, float(d.max()))
    return math.sqrt(best) if ds.metric is Metric.L2 else best


def _greedy_net_sizes(
    ds: Dataset, order: np.ndarray, diam: float, max_scales: int, net_cap: int
) -> list[int]:
    X = ds.points
    n_distinct = np.unique(X, axis=0).shape[0]
    sizes: list[int] = []
    for k in range(max_scales):
        eps = diam / (2.0**k)
        mindist = np.full(ds.n, np.inf)
        count = 0
        for p in order:
            if mindist[p] > eps:
                count += 1
                np.minimum(mindist, _dists_to(X, X[p], ds.metric), out=mindist)
        sizes.append(count)
        if count >= min(net_cap, n_distinct):
            break
    return sizes


def _exact_tiny_d0(ds: Dataset) -> float:
    """Exact doubling dimension by exhaustive half-diameter covers (n <= 8)."""
    n = ds.n
    X = ds.points
    d = _block_near(X, None, ds.metric)
    if ds.metric is Metric.L2:
        d = np.sqrt(np.maximum(d, 0.0))
    worst = 1
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if len(members) < 2:
            continue
        diam = max(d[i, j] for i in members for j in members)
        if diam == 0.0:
            continue
        half = diam / 2.0 * (1.0 + 1e-12)
        # candidate pieces: maximal subsets with diameter <= half
        pieces = []
        for sub in range(1, 1 << len(members)):
            pts = [members[i] for i in range(len(members)) if sub >> i & 1]
            if all(d[a, b] <= half for a in pts for b in pts):
                bits = 0
                for p in pts:
                    bits |= 1 << p
                pieces.append(bits)
        maximal = [p for p in pieces if not any(q != p and q & p == p for q in pieces)]
        best = _min_cover(mask, maximal)
        worst = max(worst, best)
    return math.log2(worst)


def _min_cover(target: int, pieces: list[int]) -> int:
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def solve(rem: int) -> int:
        if rem == 0:
            return 0
        low = rem & -rem
        best = 1 << 30
        for p in pieces:
            if p & low:
                best = min(best, 1 + solve(rem & ~p))
        return best

    return solve(target)


def estimate_doubling_dim(
    ds: Dataset,
    seed: int,
    method: str = "auto",
    max_scales: int = 24,
    net_cap: int = 4096,
) -> DoublingEstimate:
    """Estimate the doubling dimension from greedy net growth rates.

    Greedy nets are built at geometrically shrinking scales diam/2^k
    (same seeded point order at every scale); the estimate is the
    largest window-of-two average of log2 of consecutive net-size
    ratios, capped at log2(n). Tiny inputs (n <= 8) can be checked
    exactly by exhaustive cover search.
    """
    if method not in ("auto", "net_counting", "exact_tiny"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exact_tiny" or (method == "auto" and ds.n <= 8):
        if ds.n > 8:
            raise ValueError("exact_tiny is only feasible for n <= 8")
        return DoublingEstimate(d0=_exact_tiny_d0(ds), method="exact_tiny", scales_used=0)
    diam = _diameter(ds)
    if diam == 0.0:
        return DoublingEstimate(d0=0.0, method="net_counting", scales_used=1)
    rng = np.random.default_rng(seed)
    order = rng.permutation(ds.n)
    sizes = _greedy_net_sizes(ds, order, diam, max_scales, net_cap)
    ratios = [
        math.log2(b / a) for a, b in zip(sizes, sizes[1:]) if a > 0 and b > 0
    ]
    if not ratios:
        d0 = 0.0
    elif len(ratios) == 1:
        d0 = max(0.0, ratios[0])
    else:
        smoothed = [(x + y) / 2.0 for x, y in zip(ratios, ratios[1:])]
        d0 = max(0.0, max(smoothed))
    d0 = min(d0, math.log2(ds.n)) if ds.n > 1 else 0.0
    return DoublingEstimate(d0=d0, method="net_counting", scales_used=len(sizes))
