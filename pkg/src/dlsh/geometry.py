"""Datasets, metrics, brute-force search oracles, generators, and file I/O.

A point is a 1-D float64 array; a :class:`Dataset` wraps an ``(n, d)``
array together with a metric tag. Datasets are immutable after
construction (the coordinate array is marked read-only), so they can be
shared freely across threads.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"DLSH"
FORMAT_VERSION = 1

GeneratorKind = ("uniform_cube", "lattice", "gaussian_clusters", "sparse", "curve")


class FormatError(ValueError):
    """Raised for malformed or truncated dataset/index files."""


class Metric(enum.Enum):
    """Which l_p norm distances are measured in (p = 2 or p = 1)."""

    L2 = 2.0
    L1 = 1.0

    @property
    def p(self) -> float:
        return self.value

    @classmethod
    def from_p(cls, p: float) -> "Metric":
        if p == 2.0:
            return cls.L2
        if p == 1.0:
            return cls.L1
        raise ValueError(f"unsupported metric p={p!r}; only p in {{1, 2}}")


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array, optionally checking length."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"point must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class Dataset:
    """An ``(n, d)`` float64 coordinate array plus its metric tag."""

    points: np.ndarray
    metric: Metric = Metric.L2

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError(f"points must be 2-D (n, d), got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("dataset needs n >= 1 points of dimension d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset has non-finite coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.metric is other.metric
            and self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
        )


def distance(a, b, metric: Metric = Metric.L2) -> float:
    """The l_p distance between two points (p from ``metric``)."""
    pa = as_point(a)
    pb = as_point(b, dim=pa.shape[0])
    diff = pa - pb
    if metric is Metric.L2:
        return float(np.sqrt(np.dot(diff, diff)))
    return float(np.sum(np.abs(diff)))


def brute_force_near(ds: Dataset, q, radius: float) -> np.ndarray:
    """All indices i with distance(x_i, q) <= radius, ascending.

    This is the exhaustive oracle used to score recall; it is exact.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    qa = as_point(q, dim=ds.dim)
    diff = ds.points - qa
    if ds.metric is Metric.L2:
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    else:
        dist = np.abs(diff).sum(axis=1)
    return np.flatnonzero(dist <= radius)


def max_distance_to(ds: Dataset, q) -> float:
    """max_i distance(x_i, q); exhaustive."""
    qa = as_point(q, dim=ds.dim)
    diff = ds.points - qa
    if ds.metric is Metric.L2:
        return float(np.sqrt(np.einsum("ij,ij->i", diff, diff).max()))
    return float(np.abs(diff).sum(axis=1).max())


# ---------------------------------------------------------------------------
# synthetic generators


def _lattice_side(n: int, d: int) -> int:
    side = max(1, int(round(n ** (1.0 / d))))
    while side**d < n:
        side += 1
    return side


def generate(
    kind: str,
    n: int,
    d: int,
    seed: int,
    metric: Metric = Metric.L2,
    *,
    gap: float = 1.0,
    clusters: int = 4,
    sigma: float = 0.1,
    density: float = 0.1,
    scale: float = 1.0,
    waviness: float = 0.25,
) -> Dataset:
    """Generate a synthetic dataset; deterministic for a fixed seed.

    Kinds:

    * ``uniform_cube`` -- i.i.d. uniform in ``[0, scale]^d``.
    * ``lattice`` -- the first ``n`` cells of an integer grid scaled by
      ``gap``; pairwise distances are >= ``gap`` by construction.
    * ``gaussian_clusters`` -- ``clusters`` centers with isotropic noise
      ``sigma`` (``sigma=0`` makes cluster members coincide).
    * ``sparse`` -- each coordinate is nonzero with probability
      ``density``, values standard normal.
    * ``curve`` -- points spaced along a gently winding 1-D curve
      embedded in R^d (``waviness=0`` gives a straight segment).
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    if kind == "uniform_cube":
        pts = rng.random((n, d)) * scale
    elif kind == "lattice":
        if gap <= 0:
            raise ValueError("lattice gap must be positive")
        side = _lattice_side(n, d)
        cells = np.unravel_index(np.arange(n), (side,) * d)
        pts = np.stack(cells, axis=1).astype(np.float64) * gap
    elif kind == "gaussian_clusters":
        if clusters < 1:
            raise ValueError("clusters must be positive")
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        centers = rng.uniform(0.0, scale * clusters, size=(clusters, d))
        assign = rng.integers(0, clusters, size=n)
        pts = centers[assign] + sigma * rng.standard_normal((n, d))
    elif kind == "sparse":
        if not 0.0 < density <= 1.0:
            raise ValueError("density must be in (0, 1]")
        mask = rng.random((n, d)) < density
        pts = rng.standard_normal((n, d)) * mask
    elif kind == "curve":
        t = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
        frame = np.linalg.qr(rng.standard_normal((d, min(d, 3))))[0]
        pts = scale * np.outer(t, frame[:, 0])
        # Small-amplitude sinusoidal bend keeps curvature (and hence the
        # intrinsic dimension) low while making the curve genuinely 1-D.
        amp = scale * waviness / (2.0 * math.pi)
        if d >= 2 and waviness > 0:
            pts = pts + amp * np.outer(np.sin(2.0 * math.pi * t), frame[:, 1])
        if d >= 3 and waviness > 0:
            pts = pts + amp * np.outer(np.cos(2.0 * math.pi * t), frame[:, 2])
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return Dataset(points=pts, metric=metric)


# ---------------------------------------------------------------------------
# file I/O
#
# Binary layout (all little-endian):
#   magic "DLSH" | version u32 | n u64 | d u32 | metric p f64 | n*d f64 row-major
# CSV alternative: one point per line, comma-separated decimals, optional
# header line "# n=<n> d=<d>".

_HEADER = struct.Struct("<4sIQId")


def save_dataset(ds: Dataset, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        _save_csv(ds, path)
        return
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, ds.n, ds.dim, ds.metric.p))
        fh.write(np.ascontiguousarray(ds.points, dtype="<f8").tobytes())


def load_dataset(path, metric: Metric | None = None) -> Dataset:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path, metric or Metric.L2)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("dataset file too short for header")
    magic, version, n, d, p = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}; not a dataset file")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported dataset format version {version}")
    try:
        m = Metric.from_p(p)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    payload = raw[_HEADER.size :]
    expected = n * d * 8
    if len(payload) != expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}"
        )
    pts = np.frombuffer(payload, dtype="<f8").reshape(n, d)
    return Dataset(points=pts.astype(np.float64), metric=m)


def _save_csv(ds: Dataset, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={ds.n} d={ds.dim}\n")
        for row in ds.points:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _load_csv(path: Path, metric: Metric) -> Dataset:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise FormatError(f"bad CSV row at line {lineno}: {exc}") from exc
    if not rows:
        raise FormatError("CSV dataset has no points")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError("CSV rows have inconsistent widths")
    return Dataset(points=np.array(rows, dtype=np.float64), metric=metric)
