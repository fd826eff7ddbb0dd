"""Closed-form packing and candidate bounds, and the table-parameter planner.

Plans pick the concatenation width K from a candidate-count scale M and
then size the table count L to preserve the success probability:

    K = ceil(-rho(alpha) * ln M / ln p(1)),   L = ceil(p(1)^-K * ln(1/delta))

The classical plan uses M = n; the refined plans shrink M using the
near-pair count at a threshold multiplier beta, either with the ambient
dimension or with the doubling dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .dispersion import DispersionProfile
from .lsh_families import UniformLshFamily

MODES = ("refined_dim", "refined_doubling", "classical")


@dataclass(frozen=True)
class PlanParams:
    """Hash-table parameters plus the quantities they were derived from."""

    mode: str
    K: int
    L: int
    alpha: float
    beta: float
    r: float
    delta: float
    mu: float
    eta: float
    M: float
    predicted_cost: float
    m_clamped: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.K < 1 or self.L < 1:
            raise ValueError("K and L must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.eta < 0 or abs((self.mu - self.alpha) - self.eta) > 1e-9:
            raise ValueError("eta must equal mu - alpha and be nonnegative")
        if self.M < 1.0:
            raise ValueError("M must be >= 1")


class SummationBound(NamedTuple):
    """Two-band bound on the expected far candidates visited per round."""

    value: float
    term_near_band: float
    term_far_band: float
    k0: float


@dataclass(frozen=True)
class BoundReport:
    """Derived bound quantities for one (dataset, plan) combination."""

    packing_radius_lb: float
    candidate_cap: float
    summation_value: float
    exponent: float
    xi: float
    n: int
    n_beta: int
    beta: float
    alpha: float
    d_or_d0: float
    mode: str


def _check_pair_count(n: int, n_beta: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n_beta < 0 or n_beta > n * (n - 1) // 2:
        raise ValueError(f"n_beta={n_beta} inconsistent with n={n}")


def packing_lower_bound(n: int, n_beta: int, beta: float, r: float, d: float) -> float:
    """Lower bound on the farthest-point distance from the near-pair count.

    max_i ||x_i - x0|| >= ((n^2 / (2 N_beta + n))^(1/d) - 1) * beta * r / 2.
    The value may be <= 0 (non-informative) and is returned as-is.
    """
    _check_pair_count(n, n_beta)
    if beta <= 0 or r <= 0 or d < 1:
        raise ValueError("beta, r must be positive and d >= 1")
    ratio = n * n / (2.0 * n_beta + n)
    return 0.5 * (ratio ** (1.0 / d) - 1.0) * beta * r


def doubling_packing_lower_bound(
    n: int, n_beta: int, beta: float, r: float, d0: float
) -> float:
    """Doubling-dimension analogue of :func:`packing_lower_bound`:

    max_i ||x_i - x0|| >= ((n^2 / (2 N_beta + 2n))^(1/(d0+1)) - 1) * beta * r / 4.
    """
    _check_pair_count(n, n_beta)
    if beta <= 0 or r <= 0 or d0 < 0:
        raise ValueError("beta, r must be positive and d0 >= 0")
    ratio = n * n / (2.0 * n_beta + 2.0 * n)
    return 0.25 * (ratio ** (1.0 / (d0 + 1.0)) - 1.0) * beta * r


def _amplification(beta: float, reach: float, d_or_d0: float, doubling: bool) -> float:
    if doubling:
        return (1.0 + 4.0 * reach / beta) ** ((d_or_d0 + 1.0) / 2.0)
    return (1.0 + 2.0 * reach / beta) ** (d_or_d0 / 2.0)


def _mass(n: int, n_beta: int, doubling: bool) -> float:
    if doubling:
        return math.sqrt(2.0 * n_beta + 2.0 * n)
    return math.sqrt(2.0 * n_beta + n)


def summation_bound(
    n: int,
    n_beta: int,
    beta: float,
    alpha: float,
    eta: float,
    d_or_d0: float,
    p: float,
    family: UniformLshFamily,
    doubling: bool = False,
) -> SummationBound:
    """Bound the expected number of candidates beyond alpha*r per round.

    Splits the far points at distance (alpha + eta) * r: the inner band
    is capped by the packing geometry (k0), the outer band by n times a
    much smaller collision power.
    """
    _check_pair_count(n, n_beta)
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if alpha < 1 or eta < 0 or beta <= 0:
        raise ValueError("need alpha >= 1, eta >= 0, beta > 0")
    k0 = _amplification(beta, alpha + eta, d_or_d0, doubling) * _mass(n, n_beta, doubling)
    term1 = p ** (1.0 / family.rho(alpha)) * k0
    term2 = p ** (1.0 / family.rho(alpha + eta)) * n
    return SummationBound(value=term1 + term2, term_near_band=term1, term_far_band=term2, k0=k0)


def _finish_plan(
    mode: str,
    M: float,
    alpha: float,
    beta: float,
    delta: float,
    family: UniformLshFamily,
    mu: float,
) -> PlanParams:
    clamped = M < 1.0
    M = max(M, 1.0)
    rho_a = family.rho(alpha)
    ln_p1 = math.log(family.p1)
    k_star = -rho_a * math.log(M) / ln_p1
    K = max(1, math.ceil(k_star))
    L = math.ceil(family.p1 ** (-K) * math.log(1.0 / delta))
    return PlanParams(
        mode=mode,
        K=K,
        L=L,
        alpha=alpha,
        beta=beta,
        r=family.r,
        delta=delta,
        mu=mu,
        eta=mu - alpha,
        M=M,
        predicted_cost=M**rho_a,
        m_clamped=clamped,
    )


def plan_refined(
    n: int,
    n_beta: int,
    d: float,
    alpha: float,
    beta: float,
    delta: float,
    family: UniformLshFamily,
) -> PlanParams:
    """Dimension-aware plan from the near-pair count at threshold beta."""
    _check_pair_count(n, n_beta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if alpha < 1 or beta <= 0 or d < 1:
        raise ValueError("need alpha >= 1, beta > 0, d >= 1")
    mu = family.mu_for(alpha)
    M = _amplification(beta, mu, d, doubling=False) * _mass(n, n_beta, doubling=False)
    return _finish_plan("refined_dim", M, alpha, beta, delta, family, mu)


def plan_doubling(
    n: int,
    n_beta: int,
    d0: float,
    alpha: float,
    beta: float,
    delta: float,
    family: UniformLshFamily,
) -> PlanParams:
    """Doubling-dimension plan; same pipeline with the inflated constant."""
    _check_pair_count(n, n_beta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if alpha < 1 or beta <= 0 or d0 < 0:
        raise ValueError("need alpha >= 1, beta > 0, d0 >= 0")
    mu = family.mu_for(alpha)
    M = _amplification(beta, mu, d0, doubling=True) * _mass(n, n_beta, doubling=True)
    return _finish_plan("refined_doubling", M, alpha, beta, delta, family, mu)


def plan_classical(
    n: int, alpha: float, delta: float, family: UniformLshFamily
) -> PlanParams:
    """Worst-case plan: K sized against n, cost scale n^rho(alpha)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    return _finish_plan("classical", float(n), alpha, math.inf, delta, family, alpha)


def optimize_beta(
    prof: DispersionProfile,
    d_or_d0: float,
    alpha: float,
    delta: float,
    family: UniformLshFamily,
    mode: str = "refined_dim",
) -> PlanParams:
    """Pick the profiled beta minimizing predicted cost (ties: larger beta)."""
    if mode not in ("refined_dim", "refined_doubling"):
        raise ValueError("mode must be refined_dim or refined_doubling")
    planner = plan_refined if mode == "refined_dim" else plan_doubling
    best: PlanParams | None = None
    for beta, n_beta in zip(prof.betas, prof.counts):
        plan = planner(prof.n, n_beta, d_or_d0, alpha, beta, delta, family)
        if best is None or plan.predicted_cost <= best.predicted_cost:
            best = plan
    assert best is not None
    return best


def asymptotic_exponent(alpha: float, eps: float, xi: float, c: float) -> float:
    """Predicted log-cost / log-n for the quadratic-exponent model family:

    (1 + eps + xi * log2(1 + 4*sqrt(2)*alpha / c)) / (2 alpha^2),

    where c is the dispersion threshold and xi the normalized doubling
    dimension (base-2 logs throughout).
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    spread = 0.0 if math.isinf(c) else math.log2(1.0 + 4.0 * math.sqrt(2.0) * alpha / c)
    return (1.0 + eps + xi * spread) / (2.0 * alpha * alpha)


def plan_exponent(plan: PlanParams, n: int) -> float:
    """log(predicted_cost) / log(n); the classical plan gives rho(alpha)."""
    if n < 2:
        return 0.0
    return math.log(plan.predicted_cost) / math.log(n)


def bound_report(
    n: int,
    n_beta: int,
    beta: float,
    alpha: float,
    eta: float,
    d_or_d0: float,
    p: float,
    family: UniformLshFamily,
    r: float,
    doubling: bool = False,
    xi: float = 0.0,
    exponent: float = 0.0,
) -> BoundReport:
    """Bundle the packing bound, candidate cap, and exponent for reporting."""
    if doubling:
        lb = doubling_packing_lower_bound(n, n_beta, beta, r, d_or_d0)
    else:
        lb = packing_lower_bound(n, n_beta, beta, r, d_or_d0)
    sb = summation_bound(n, n_beta, beta, alpha, eta, d_or_d0, p, family, doubling)
    return BoundReport(
        packing_radius_lb=lb,
        candidate_cap=sb.k0,
        summation_value=sb.value,
        exponent=exponent,
        xi=xi,
        n=n,
        n_beta=n_beta,
        beta=beta,
        alpha=alpha,
        d_or_d0=d_or_d0,
        mode="refined_doubling" if doubling else "refined_dim",
    )
