"""Benchmark harness: planted/random query batches over built indexes."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import index as index_mod
from .bounds import PlanParams, summation_bound
from .geometry import Dataset, Metric, brute_force_near
from .lsh_families import UniformLshFamily


@dataclass(frozen=True)
class BenchRecord:
    """One row of benchmark output for a (dataset, plan) pair."""

    dataset: str
    mode: str
    alpha: float
    beta: float
    K: int
    L: int
    recall: float
    mean_candidates: float
    mean_far_per_round: float
    predicted_bound: float
    total_work: int
    wall_time_s: float


def planted_query(ds: Dataset, rng: np.random.Generator, r: float) -> np.ndarray:
    """A query at distance exactly r from a random dataset point.

    Guarantees the promise that some point lies within r of the query.
    """
    i = int(rng.integers(ds.n))
    u = rng.standard_normal(ds.dim)
    norm = np.sqrt(u @ u) if ds.metric is Metric.L2 else np.abs(u).sum()
    while norm == 0.0:  # astronomically unlikely; regenerate
        u = rng.standard_normal(ds.dim)
        norm = np.sqrt(u @ u) if ds.metric is Metric.L2 else np.abs(u).sum()
    return ds.points[i] + (r / norm) * u


def random_query(ds: Dataset, rng: np.random.Generator, r: float) -> np.ndarray:
    lo = ds.points.min(axis=0) - 2.0 * r
    hi = ds.points.max(axis=0) + 2.0 * r
    return rng.uniform(lo, hi)


def predicted_far_bound(
    plan: PlanParams, n: int, n_beta: int, d_or_d0: float, family: UniformLshFamily
) -> float:
    """Per-round far-candidate bound at the plan's collision power p(1)^K."""
    p = family.p1**plan.K
    if plan.mode == "classical":
        # single-threshold relaxation: every far point at collision p(alpha)^K
        return n * p ** (1.0 / family.rho(plan.alpha))
    return summation_bound(
        n,
        n_beta,
        plan.beta,
        plan.alpha,
        plan.eta,
        d_or_d0,
        p,
        family,
        doubling=plan.mode == "refined_doubling",
    ).value


def run_bench(
    ds: Dataset,
    dataset_id: str,
    plans: list[PlanParams],
    family: UniformLshFamily,
    num_queries: int,
    planted: bool,
    seed: int,
    n_beta_by_mode: dict[str, int] | None = None,
    d_or_d0_by_mode: dict[str, float] | None = None,
    rebuilds: int = 1,
    budget: int | None = None,
) -> list[BenchRecord]:
    """Run the query batch against every plan and aggregate counters.

    The same seeded query stream is replayed for every plan so records
    are directly comparable. ``rebuilds`` splits the batch over several
    independently built indexes to decorrelate table draws.
    """
    if num_queries < 0:
        raise ValueError("num_queries must be nonnegative")
    if rebuilds < 1:
        raise ValueError("rebuilds must be >= 1")
    records = []
    for plan in plans:
        t0 = time.perf_counter()
        qrng = np.random.default_rng(seed)
        hits = 0
        promises = 0
        candidates = 0
        far = 0
        rounds = 0
        work = 0
        per_query = max(1, math.ceil(num_queries / rebuilds)) if num_queries else 0
        remaining = num_queries
        build_round = 0
        while remaining > 0:
            idx = index_mod.build(ds, plan, family, seed=seed + 7919 * build_round)
            build_round += 1
            for _ in range(min(per_query, remaining)):
                q = (
                    planted_query(ds, qrng, plan.r)
                    if planted
                    else random_query(ds, qrng, plan.r)
                )
                if planted:
                    promise = True
                else:
                    promise = brute_force_near(ds, q, plan.r).size > 0
                stats = index_mod.query(idx, q, max_candidates=budget)
                if promise:
                    promises += 1
                    if stats.outcome == "found":
                        hits += 1
                candidates += stats.candidates_examined
                far += stats.far_candidates
                rounds += stats.rounds_executed
                work += stats.rounds_executed * plan.K + stats.candidates_examined
            remaining -= per_query
        n_beta = (n_beta_by_mode or {}).get(plan.mode, 0)
        d_or_d0 = (d_or_d0_by_mode or {}).get(plan.mode, float(ds.dim))
        records.append(
            BenchRecord(
                dataset=dataset_id,
                mode=plan.mode,
                alpha=plan.alpha,
                beta=plan.beta,
                K=plan.K,
                L=plan.L,
                recall=(hits / promises) if promises else 1.0,
                mean_candidates=(candidates / num_queries) if num_queries else 0.0,
                mean_far_per_round=(far / rounds) if rounds else 0.0,
                predicted_bound=predicted_far_bound(plan, ds.n, n_beta, d_or_d0, family),
                total_work=work,
                wall_time_s=time.perf_counter() - t0,
            )
        )
    return records


BENCH_COLUMNS = (
    "dataset",
    "mode",
    "alpha",
    "beta",
    "K",
    "L",
    "recall",
    "mean_candidates",
    "mean_far_per_round",
    "predicted_bound",
    "total_work",
    "wall_time_s",
)


def record_row(rec: BenchRecord) -> list[str]:
    return [
        rec.dataset,
        rec.mode,
        repr(rec.alpha),
        repr(rec.beta),
        str(rec.K),
        str(rec.L),
        repr(rec.recall),
        repr(rec.mean_candidates),
        repr(rec.mean_far_per_round),
        repr(rec.predicted_bound),
        str(rec.total_work),
        repr(rec.wall_time_s),
    ]
