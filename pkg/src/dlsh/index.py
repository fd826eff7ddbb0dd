"""Hash-table index: build L tables of K-wise keys, query with early stop.

Queries walk the tables in order, traverse the matching bucket in
insertion order, and stop at the first point within alpha * r. Per-query
instrumentation (rounds, candidates, far candidates, distance
computations, hash wall time) feeds the benchmark harness and the bound
checks.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass, replace

import numpy as np

from .bounds import PlanParams
from .geometry import Dataset, FormatError, Metric, as_point
from .lsh_families import ConcatenatedHash, UniformLshFamily

INDEX_MAGIC = b"DLSX"
INDEX_VERSION = 1


@dataclass(frozen=True)
class QueryStats:
    """Counters for one query; ``hash_eval_seconds`` is wall-clock."""

    outcome: str  # "found" or "not_found"
    found_index: int | None
    found_distance: float | None
    rounds_executed: int
    candidates_examined: int
    far_candidates: int
    distance_computations: int
    hash_eval_seconds: float
    truncated: bool = False

    def same_outcome(self, other: "QueryStats") -> bool:
        """Equality ignoring the wall-clock field."""
        return replace(self, hash_eval_seconds=0.0) == replace(
            other, hash_eval_seconds=0.0
        )


class LshIndex:
    """L hash tables over one dataset; immutable once built."""

    def __init__(
        self,
        dataset: Dataset,
        plan: PlanParams,
        family: UniformLshFamily,
        hashes: list[ConcatenatedHash],
        tables: list[dict[bytes, list[int]]],
        seed: int,
    ) -> None:
        self.dataset = dataset
        self.plan = plan
        self.family = family
        self.hashes = hashes
        self.tables = tables
        self.seed = seed

    @property
    def L(self) -> int:
        return self.plan.L

    @property
    def K(self) -> int:
        return self.plan.K


def _bucketize(keys: np.ndarray) -> dict[bytes, list[int]]:
    """Group row indices by identical key rows, preserving dataset order.

    Bucket keys are the packed little-endian bytes of the K int64 hash
    values; grouping uses a stable sort so each bucket lists its members
    in insertion (dataset) order.
    """
    n, k = keys.shape
    packed = np.ascontiguousarray(keys.astype("<i8")).view(f"V{8 * k}").ravel()
    order = np.argsort(packed, kind="stable")
    sorted_packed = packed[order]
    starts = np.flatnonzero(
        np.concatenate(([True], sorted_packed[1:] != sorted_packed[:-1]))
    )
    ends = np.append(starts[1:], n)
    return {
        sorted_packed[s].tobytes(): order[s:e].tolist()
        for s, e in zip(starts.tolist(), ends.tolist())
    }


def build(ds: Dataset, plan: PlanParams, family: UniformLshFamily, seed: int) -> LshIndex:
    """Sample L*K hash functions and bucket every point in every table."""
    if family.metric is not ds.metric:
        raise ValueError("family metric does not match dataset metric")
    if plan.r != family.r:
        raise ValueError("plan base radius does not match family")
    table_seeds = np.random.SeedSequence(seed).spawn(plan.L)
    hashes = [family.sample_concatenated(ds.dim, plan.K, s) for s in table_seeds]
    tables = [_bucketize(ch.keys(ds.points)) for ch in hashes]
    return LshIndex(ds, plan, family, hashes, tables, seed)


def _point_distance(X: np.ndarray, j: int, q: np.ndarray, metric: Metric) -> float:
    diff = X[j] - q
    if metric is Metric.L2:
        return float(np.sqrt(np.dot(diff, diff)))
    return float(np.abs(diff).sum())


def query(idx: LshIndex, q, max_candidates: int | None = None) -> QueryStats:
    """Answer one query; early-stops at the first point within alpha * r."""
    if max_candidates is not None and max_candidates < 1:
        raise ValueError("max_candidates must be >= 1")
    qa = as_point(q, dim=idx.dataset.dim)
    accept = idx.plan.alpha * idx.plan.r
    X = idx.dataset.points
    metric = idx.dataset.metric
    rounds = candidates = far = dcomp = 0
    hash_secs = 0.0
    for ch, table in zip(idx.hashes, idx.tables):
        t0 = time.perf_counter()
        key = ch.key_bytes(qa)
        hash_secs += time.perf_counter() - t0
        rounds += 1
        for j in table.get(key, ()):
            candidates += 1
            dcomp += 1
            dist = _point_distance(X, j, qa, metric)
            if dist <= accept:
                return QueryStats(
                    outcome="found",
                    found_index=j,
                    found_distance=dist,
                    rounds_executed=rounds,
                    candidates_examined=candidates,
                    far_candidates=far,
                    distance_computations=dcomp,
                    hash_eval_seconds=hash_secs,
                )
            far += 1
            if max_candidates is not None and candidates >= max_candidates:
                return QueryStats(
                    outcome="not_found",
                    found_index=None,
                    found_distance=None,
                    rounds_executed=rounds,
                    candidates_examined=candidates,
                    far_candidates=far,
                    distance_computations=dcomp,
                    hash_eval_seconds=hash_secs,
                    truncated=True,
                )
    return QueryStats(
        outcome="not_found",
        found_index=None,
        found_distance=None,
        rounds_executed=rounds,
        candidates_examined=candidates,
        far_candidates=far,
        distance_computations=dcomp,
        hash_eval_seconds=hash_secs,
    )


def query_with_budget(idx: LshIndex, q, max_candidates: int) -> QueryStats:
    """As :func:`query`, but gives up after examining ``max_candidates``."""
    return query(idx, q, max_candidates=max_candidates)


# ---------------------------------------------------------------------------
# serialization
#
# Layout (little-endian):
#   magic "DLSX" | version u32
#   u32 len + family descriptor JSON | u32 len + plan JSON
#   n u64 | d u32 | L u32 | K u32 | seed u64
#   per table: K*d f64 projections | K f64 offsets
#   per table: u64 nbuckets, then per bucket: K*i64 key | u64 count | count*u64 ids

_IDX_HEADER = struct.Struct("<4sI")
_IDX_SHAPE = struct.Struct("<QIIIQ")


def save_index(idx: LshIndex, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_IDX_HEADER.pack(INDEX_MAGIC, INDEX_VERSION))
        for blob in (idx.family.descriptor(), _plan_json(idx.plan)):
            data = blob.encode("utf-8")
            fh.write(struct.pack("<I", len(data)))
            fh.write(data)
        fh.write(
            _IDX_SHAPE.pack(idx.dataset.n, idx.dataset.dim, idx.L, idx.K, idx.seed)
        )
        for ch in idx.hashes:
            fh.write(np.ascontiguousarray(ch.projections, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(ch.offsets, dtype="<f8").tobytes())
        for table in idx.tables:
            fh.write(struct.pack("<Q", len(table)))
            for key, members in table.items():
                fh.write(key)  # packed K little-endian int64
                fh.write(struct.pack("<Q", len(members)))
                fh.write(np.asarray(members, dtype="<u8").tobytes())


def load_index(path, ds: Dataset) -> LshIndex:
    """Reload an index and re-attach its dataset; answers queries identically."""
    raw = open(path, "rb").read()
    view = memoryview(raw)
    off = 0

    def take(nbytes: int) -> memoryview:
        nonlocal off
        if off + nbytes > len(view):
            raise FormatError("index file truncated")
        out = view[off : off + nbytes]
        off += nbytes
        return out

    magic, version = _IDX_HEADER.unpack(take(_IDX_HEADER.size))
    if magic != INDEX_MAGIC:
        raise FormatError(f"bad magic {bytes(magic)!r}; not an index file")
    if version != INDEX_VERSION:
        raise FormatError(f"unsupported index version {version}")
    blobs = []
    for _ in range(2):
        (blen,) = struct.unpack("<I", take(4))
        blobs.append(bytes(take(blen)).decode("utf-8"))
    family = UniformLshFamily.from_descriptor(blobs[0])
    plan = _plan_from_json(blobs[1])
    n, d, L, K, seed = _IDX_SHAPE.unpack(take(_IDX_SHAPE.size))
    if family.metric is not ds.metric:
        raise FormatError("index family metric does not match dataset metric")
    if n != ds.n or d != ds.dim:
        raise FormatError(
            f"index built for n={n}, d={d}; dataset has n={ds.n}, d={ds.dim}"
        )
    hashes = []
    for _ in range(L):
        proj = np.frombuffer(take(K * d * 8), dtype="<f8").reshape(K, d).copy()
        offs = np.frombuffer(take(K * 8), dtype="<f8").copy()
        hashes.append(ConcatenatedHash(projections=proj, offsets=offs, w=family.w))
    tables: list[dict[bytes, list[int]]] = []
    for _ in range(L):
        (nbuckets,) = struct.unpack("<Q", take(8))
        table: dict[bytes, list[int]] = {}
        for _ in range(nbuckets):
            key = bytes(take(K * 8))
            (cnt,) = struct.unpack("<Q", take(8))
            table[key] = np.frombuffer(take(cnt * 8), dtype="<u8").astype(int).tolist()
        tables.append(table)
    if off != len(view):
        raise FormatError("trailing bytes after index payload")
    return LshIndex(ds, plan, family, hashes, tables, seed)


def _plan_json(plan: PlanParams) -> str:
    from dataclasses import asdict

    return json.dumps(asdict(plan), sort_keys=True)


def _plan_from_json(text: str) -> PlanParams:
    d = json.loads(text)
    return PlanParams(**d)
