"""Line-projection hash families and their collision-probability curves.

A hash is ``floor((<a, x> + b) / w)`` with ``a`` drawn from a stable
distribution (Gaussian for l2, Cauchy for l1) and ``b`` uniform on
``[0, w)``. The collision probability for a pair at distance ``s * r``
is computed by adaptive quadrature; the exponent curve ``rho(s)`` is
available both in measured (tabulated) form and as the analytic models
``1/s`` and ``1/s^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .geometry import Metric, as_point

RHO_MODELS = ("inverse_s", "inverse_s_squared", "tabulated")

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _abs_stable_density(metric: Metric, x: float) -> float:
    # density of |Z| for the projecting stable law: half-normal / half-Cauchy
    if metric is Metric.L2:
        return _SQRT_2_OVER_PI * math.exp(-0.5 * x * x)
    return 2.0 / (math.pi * (1.0 + x * x))


def _collision_integral(metric: Metric, c: float, w: float) -> float:
    """P[floor((<a,x>+b)/w) collides] for a pair at distance c."""
    if c <= 0:
        raise ValueError("distance must be positive")

    def integrand(t: float) -> float:
        return (1.0 / c) * _abs_stable_density(metric, t / c) * (1.0 - t / w)

    value, _err = integrate.quad(integrand, 0.0, w, epsabs=1e-14, epsrel=1e-10, limit=200)
    return value


@dataclass(frozen=True)
class HashFunction:
    """One line projection: coefficients, offset in [0, w), bucket width."""

    projection: np.ndarray
    offset: float
    w: float

    def __call__(self, x) -> int:
        xv = as_point(x, dim=self.projection.shape[0])
        return int(math.floor((float(self.projection @ xv) + self.offset) / self.w))


@dataclass(frozen=True)
class ConcatenatedHash:
    """K stacked projections evaluated together into one bucket key."""

    projections: np.ndarray  # (K, d)
    offsets: np.ndarray  # (K,)
    w: float

    @property
    def k(self) -> int:
        return self.projections.shape[0]

    @property
    def parts(self) -> tuple[HashFunction, ...]:
        return tuple(
            HashFunction(projection=p, offset=float(b), w=self.w)
            for p, b in zip(self.projections, self.offsets)
        )

    def key(self, x: np.ndarray) -> tuple[int, ...]:
        vals = np.floor((self.projections @ x + self.offsets) / self.w)
        return tuple(vals.astype(np.int64).tolist())

    def key_bytes(self, x: np.ndarray) -> bytes:
        """Packed little-endian form of :meth:`key`, used as a dict key."""
        vals = np.floor((self.projections @ x + self.offsets) / self.w)
        return vals.astype("<i8").tobytes()

    def keys(self, X: np.ndarray) -> np.ndarray:
        """Bucket keys for every row of X, shape (n, K), int64."""
        vals = np.floor((X @ self.projections.T + self.offsets) / self.w)
        return vals.astype(np.int64)


class UniformLshFamily:
    """A line-projection family with a fixed base radius and bucket width.

    ``rho_model`` selects what the parameter planner uses for the
    exponent curve: the analytic models ``inverse_s`` (1/s) and
    ``inverse_s_squared`` (1/s^2), or ``tabulated`` which inverts the
    measured collision curve. ``inverse_s_squared`` is an analytic
    planning model only; sampled hashes are always line projections.
    """

    def __init__(
        self,
        metric: Metric = Metric.L2,
        r: float = 1.0,
        w: float | None = None,
        rho_model: str = "inverse_s",
        p1_target: float = 0.5,
        name: str | None = None,
    ) -> None:
        if r <= 0:
            raise ValueError("base radius r must be positive")
        if rho_model not in RHO_MODELS:
            raise ValueError(f"rho_model must be one of {RHO_MODELS}")
        if w is None:
            if not 0.4 <= p1_target <= 0.6:
                raise ValueError("p1_target must lie in [0.4, 0.6]")
            w = _calibrate_width(metric, r, p1_target)
        elif w <= 0:
            raise ValueError("bucket width w must be positive")
        self.metric = metric
        self.r = float(r)
        self.w = float(w)
        self.rho_model = rho_model
        default = "gaussian-l2" if metric is Metric.L2 else "cauchy-l1"
        self.name = name or default
        self.p1 = self.collision_prob(1.0)

    def __repr__(self) -> str:
        return (
            f"UniformLshFamily({self.name}, r={self.r}, w={self.w:.6g}, "
            f"rho_model={self.rho_model}, p1={self.p1:.4f})"
        )

    # -- collision curve ----------------------------------------------------

    def collision_prob(self, s: float) -> float:
        """p(s): single-hash collision probability at distance s * r."""
        if s <= 0:
            raise ValueError("s must be positive")
        return _collision_integral(self.metric, s * self.r, self.w)

    def rho(self, s: float) -> float:
        """Exponent curve at distance ratio s >= 1, per the family's model."""
        if s < 1:
            raise ValueError("rho is defined for s >= 1")
        if self.rho_model == "inverse_s":
            return 1.0 / s
        if self.rho_model == "inverse_s_squared":
            return 1.0 / (s * s)
        if s == 1.0:
            return 1.0
        return math.log(self.p1) / math.log(self.collision_prob(s))

    def mu_for(self, alpha: float) -> float:
        """Solve rho(mu) = rho(alpha) / 2 for the second distance band."""
        if alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.rho_model == "inverse_s":
            return 2.0 * alpha
        if self.rho_model == "inverse_s_squared":
            return math.sqrt(2.0) * alpha
        target = self.rho(alpha) / 2.0
        lo, hi = alpha, max(2.0 * alpha, 4.0)
        while self.rho(hi) > target:
            hi *= 2.0
            if hi > 1e6:
                raise ValueError("rho model not invertible: no root below s=1e6")
        return float(
            optimize.brentq(lambda s: self.rho(s) - target, lo, hi, xtol=1e-13, rtol=8.9e-16)
        )

    # -- sampling -----------------------------------------------------------

    def sample_hash(self, dim: int, seed) -> HashFunction:
        """One hash function; deterministic for a fixed seed."""
        if dim < 1:
            raise ValueError("dim must be positive")
        rng = np.random.default_rng(seed)
        proj = self._sample_projections(rng, 1, dim)[0]
        offset = float(rng.uniform(0.0, self.w))
        return HashFunction(projection=proj, offset=offset, w=self.w)

    def sample_concatenated(self, dim: int, k: int, seed) -> ConcatenatedHash:
        """K hash functions sharing one seeded stream (projections, then offsets)."""
        if dim < 1 or k < 1:
            raise ValueError("dim and k must be positive")
        rng = np.random.default_rng(seed)
        proj = self._sample_projections(rng, k, dim)
        offsets = rng.uniform(0.0, self.w, size=k)
        return ConcatenatedHash(projections=proj, offsets=offsets, w=self.w)

    def _sample_projections(self, rng, k: int, dim: int) -> np.ndarray:
        if self.metric is Metric.L2:
            return rng.standard_normal((k, dim))
        return rng.standard_cauchy((k, dim))

    # -- serialization ------------------------------------------------------

    def descriptor(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "p": self.metric.p,
                "w": self.w,
                "r": self.r,
                "rho_model": self.rho_model,
            },
            sort_keys=True,
        )

    @classmethod
    def from_descriptor(cls, text: str) -> "UniformLshFamily":
        d = json.loads(text)
        return cls(
            metric=Metric.from_p(d["p"]),
            r=d["r"],
            w=d["w"],
            rho_model=d["rho_model"],
            name=d.get("name"),
        )


def _calibrate_width(metric: Metric, r: float, p1_target: float) -> float:
    # p(1) is strictly increasing in w, so the root is unique.
    f = lambda w: _collision_integral(metric, r, w) - p1_target
    lo, hi = 1e-6 * r, 4.0 * r
    while f(hi) < 0:
        hi *= 2.0
    return float(optimize.brentq(f, lo, hi, xtol=1e-12 * r, rtol=8.9e-16))
