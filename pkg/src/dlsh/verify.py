"""Property suites behind ``dlsh verify``: randomized oracle checks.

Every suite is deterministic for a fixed seed and reports the number of
cases run, the number of failures, and a short description of the first
counterexample (if any).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds, dispersion, geometry, index as index_mod
from .geometry import Dataset, Metric
from .lsh_families import UniformLshFamily

SUITES = ("graph", "packing", "collision", "recall", "bounds")

_DENSITIES = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: int = 0
    messages: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.failures += 1
        if len(self.messages) < 5:
            self.messages.append(msg)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def random_er_edges(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    ii, jj = np.triu_indices(n, k=1)
    mask = rng.random(ii.shape[0]) < p
    return list(zip(ii[mask].tolist(), jj[mask].tolist()))


def suite_graph(seed: int, num_graphs: int = 1000, max_n: int = 200) -> SuiteResult:
    """Packed-graph conditions on random graphs, exact integer arithmetic."""
    res = SuiteResult("graph")
    rng = np.random.default_rng(seed)
    for case in range(num_graphs):
        n = int(rng.integers(2, max_n + 1))
        p = _DENSITIES[case % len(_DENSITIES)]
        edges = random_er_edges(n, p, rng)
        g = dispersion.pack_graph(n, edges)
        res.cases += 1
        check = dispersion.verify_packing(g, edges)
        if not check:
            res.fail(f"case {case} (n={n}, p={p}): {check.reason}")
            continue
        budget = sum(m * (m - 1) // 2 for m in g.multiplicities.values())
        if budget > len(edges):
            res.fail(f"case {case}: pair budget {budget} > |E|={len(edges)}")
            continue
        t = len(g.representatives)
        if t * (n + 2 * len(edges)) < n * n:
            res.fail(f"case {case}: |T|={t} below n^2/(n+2|E|)")
            continue
        deg = [0] * n
        for i, j in edges:
            deg[i] += 1
            deg[j] += 1
        # representatives are processed first, so their (original) degree
        # never exceeds the degree of the vertices attached to them
        if any(deg[int(g.assignment[v])] > deg[v] for v in range(n)):
            res.fail(f"case {case}: representative degree above member degree")
    return res


def _random_oracle_dataset(rng: np.random.Generator) -> Dataset:
    n = int(rng.integers(2, 101))
    d = int(rng.integers(1, 6))
    metric = Metric.L2 if rng.random() < 0.8 else Metric.L1
    kind = rng.choice(["uniform_cube", "gaussian_clusters", "lattice"])
    seed = int(rng.integers(2**32))
    if kind == "lattice":
        gap = float(rng.uniform(0.2, 3.0))
        return geometry.generate("lattice", n, d, seed, metric=metric, gap=gap)
    if kind == "gaussian_clusters":
        k = int(rng.integers(1, 6))
        sigma = float(rng.uniform(0.0, 0.5))
        return geometry.generate(
            "gaussian_clusters", n, d, seed, metric=metric, clusters=k, sigma=sigma
        )
    return geometry.generate("uniform_cube", n, d, seed, metric=metric, scale=2.0)


def suite_packing(
    seed: int,
    num_datasets: int = 500,
    num_queries: int = 10,
    num_curves: int = 60,
    slack: float = 1e-9,
) -> SuiteResult:
    """Farthest-point lower bounds hold against the brute-force oracle."""
    res = SuiteResult("packing")
    rng = np.random.default_rng(seed)
    betas = (0.5, 1.0, 2.0, 4.0)
    for case in range(num_datasets):
        ds = _random_oracle_dataset(rng)
        r = float(rng.uniform(0.05, 1.0))
        prof = dispersion.profile(ds, r, betas)
        res.cases += 1
        failed = False
        for _ in range(num_queries):
            q = rng.uniform(
                ds.points.min(axis=0) - 1.0, ds.points.max(axis=0) + 1.0
            )
            max_dist = geometry.max_distance_to(ds, q)
            for beta, n_beta in zip(prof.betas, prof.counts):
                lb = bounds.packing_lower_bound(ds.n, n_beta, beta, r, ds.dim)
                if max_dist < lb - slack:
                    res.fail(
                        f"dim case {case}: max {max_dist:.6g} < bound {lb:.6g} "
                        f"(n={ds.n}, d={ds.dim}, beta={beta})"
                    )
                    failed = True
                    break
            if failed:
                break
    for case in range(num_curves):
        d = int(rng.integers(2, 11))
        n = int(rng.integers(64, 513))
        waviness = float(rng.choice([0.0, 0.2, 0.4]))
        metric = Metric.L2 if rng.random() < 0.8 else Metric.L1
        ds = geometry.generate(
            "curve", n, d, int(rng.integers(2**32)), metric=metric, waviness=waviness
        )
        r = float(rng.uniform(0.01, 0.1))
        prof = dispersion.profile(ds, r, betas)
        est = dispersion.estimate_doubling_dim(ds, seed=int(rng.integers(2**32)))
        d0 = max(2.0, est.d0)  # conservative cap for 1-D data
        res.cases += 1
        failed = False
        for _ in range(num_queries):
            q = rng.uniform(ds.points.min(axis=0) - 1.0, ds.points.max(axis=0) + 1.0)
            max_dist = geometry.max_distance_to(ds, q)
            for beta, n_beta in zip(prof.betas, prof.counts):
                lb = bounds.doubling_packing_lower_bound(ds.n, n_beta, beta, r, d0)
                if max_dist < lb - slack:
                    res.fail(
                        f"doubling case {case}: max {max_dist:.6g} < bound {lb:.6g} "
                        f"(n={ds.n}, d={d}, d0={d0:.3g}, beta={beta})"
                    )
                    failed = True
                    break
            if failed:
                break
    return res


def empirical_collision_rate(
    family: UniformLshFamily, s: float, trials: int, seed: int, dim: int = 4
) -> float:
    """Monte-Carlo collision frequency for one pair at distance s * r."""
    rng = np.random.default_rng(seed)
    x = np.zeros(dim)
    y = np.zeros(dim)
    y[0] = s * family.r  # distance is all that matters; axis choice is free
    hits = 0
    done = 0
    chunk = 200_000
    while done < trials:
        m = min(chunk, trials - done)
        if family.metric is Metric.L2:
            proj = rng.standard_normal((m, dim))
        else:
            proj = rng.standard_cauchy((m, dim))
        b = rng.uniform(0.0, family.w, size=m)
        hx = np.floor((proj @ x + b) / family.w)
        hy = np.floor((proj @ y + b) / family.w)
        hits += int(np.count_nonzero(hx == hy))
        done += m
    return hits / trials


def suite_collision(
    seed: int, trials: int = 1_000_000, svals=(1.0, 1.5, 2.0, 3.0, 4.0)
) -> SuiteResult:
    """Quadrature collision curve matches Monte-Carlo within 3 sigma."""
    res = SuiteResult("collision")
    for fam_seed, metric in ((0, Metric.L2), (1, Metric.L1)):
        family = UniformLshFamily(metric=metric, r=1.0)
        probs = []
        for k, s in enumerate(svals):
            p = family.collision_prob(s)
            probs.append(p)
            emp = empirical_collision_rate(
                family, s, trials, seed=seed + 1000 * fam_seed + k
            )
            se = math.sqrt(p * (1.0 - p) / trials)
            res.cases += 1
            if abs(emp - p) > 3.0 * se:
                res.fail(
                    f"{family.name} s={s}: quadrature {p:.6f} vs MC {emp:.6f} "
                    f"(3se={3 * se:.6f})"
                )
        res.cases += 1
        if any(b >= a for a, b in zip(probs, probs[1:])):
            res.fail(f"{family.name}: collision curve not strictly decreasing")
    return res


def suite_recall(
    seed: int,
    n: int = 2000,
    d: int = 8,
    num_queries: int = 400,
    alpha: float = 2.0,
    delta: float = 0.1,
) -> SuiteResult:
    """Planted-neighbor recall meets 1 - delta for refined and classical plans."""
    res = SuiteResult("recall")
    r = 0.025
    ds = geometry.generate("lattice", n, d, seed=seed, gap=1.0)
    family = UniformLshFamily(metric=Metric.L2, r=r)
    prof = dispersion.profile(ds, r, (1.0, 5.0, 10.0, 20.0, 39.0))
    refined = bounds.optimize_beta(prof, d, alpha, delta, family)
    classical = bounds.plan_classical(n, alpha, delta, family)
    rng = np.random.default_rng(seed + 1)
    for plan in (refined, classical):
        idx = index_mod.build(ds, plan, family, seed=seed + 2)
        hits = 0
        from .bench import planted_query

        for _ in range(num_queries):
            q = planted_query(ds, rng, r)
            if index_mod.query(idx, q).outcome == "found":
                hits += 1
        recall = hits / num_queries
        se = math.sqrt(delta * (1.0 - delta) / num_queries)
        res.cases += 1
        if recall < 1.0 - delta - 3.0 * se:
            res.fail(f"{plan.mode}: recall {recall:.4f} below {1 - delta} - 3se")
    return res


def suite_bounds(seed: int) -> SuiteResult:
    """Deterministic checks of the closed-form planner arithmetic."""
    res = SuiteResult("bounds")
    fam_s = UniformLshFamily(metric=Metric.L2, r=1.0, rho_model="inverse_s")
    fam_s2 = UniformLshFamily(metric=Metric.L2, r=1.0, rho_model="inverse_s_squared")
    fam_tab = UniformLshFamily(metric=Metric.L2, r=1.0, rho_model="tabulated")

    for alpha in (1.0, 1.5, 2.0, 4.0):
        res.cases += 1
        if abs(fam_s.mu_for(alpha) - 2.0 * alpha) > 1e-10:
            res.fail(f"mu(inverse_s, {alpha}) != 2 alpha")
        res.cases += 1
        if abs(fam_s2.mu_for(alpha) - math.sqrt(2.0) * alpha) > 1e-10:
            res.fail(f"mu(inverse_s_squared, {alpha}) != sqrt(2) alpha")
        res.cases += 1
        mu = fam_tab.mu_for(alpha)
        if abs(fam_tab.rho(mu) - fam_tab.rho(alpha) / 2.0) > 1e-9:
            res.fail(f"tabulated mu residual too large at alpha={alpha}")

    for n in (1000, 10_000):
        res.cases += 1
        cap = n * (n - 1) // 2
        plan = bounds.plan_refined(n, cap, 8, 2.0, 1e9, 0.1, fam_s)
        classical = bounds.plan_classical(n, 2.0, 0.1, fam_s)
        if abs(plan.predicted_cost - classical.predicted_cost) > 0.01 * classical.predicted_cost:
            res.fail(f"limit consistency broken at n={n}")

    rng = np.random.default_rng(seed)
    for _ in range(50):
        n = int(rng.integers(10, 100_000))
        cap = n * (n - 1) // 2
        d = float(rng.integers(1, 17))
        alpha = float(rng.uniform(1.0, 4.0))
        delta = 0.1
        betas = np.sort(rng.uniform(0.5, 50.0, size=4))
        n_betas = np.sort(rng.integers(0, cap + 1, size=4))
        res.cases += 1
        costs = [
            bounds.plan_refined(n, int(n_betas[0]), d, alpha, float(b), delta, fam_s).predicted_cost
            for b in betas
        ]
        if any(c2 > c1 * (1 + 1e-12) for c1, c2 in zip(costs, costs[1:])):
            res.fail("predicted cost not nonincreasing in beta")
        res.cases += 1
        costs = [
            bounds.plan_refined(n, int(nb), d, alpha, float(betas[0]), delta, fam_s).predicted_cost
            for nb in n_betas
        ]
        if any(c2 < c1 * (1 - 1e-12) for c1, c2 in zip(costs, costs[1:])):
            res.fail("predicted cost not nondecreasing in n_beta")
        res.cases += 1
        plan = bounds.plan_refined(n, int(n_betas[1]), d, alpha, float(betas[1]), delta, fam_s)
        sb = bounds.summation_bound(
            n, int(n_betas[1]), float(betas[1]), alpha, plan.eta, d, fam_s.p1**plan.K, fam_s
        )
        if sb.value < sb.term_far_band or sb.value > 2.0 * max(
            sb.term_near_band, sb.term_far_band
        ):
            res.fail("summation bound decomposition out of range")

    res.cases += 1
    if abs(bounds.packing_lower_bound(4, 0, 1.0, 1.0, 1) - 1.5) > 1e-12:
        res.fail("packing bound spot value (n=4) wrong")
    res.cases += 1
    if abs(bounds.packing_lower_bound(100, 0, 2.0, 0.5, 2) - 4.5) > 1e-12:
        res.fail("packing bound spot value (n=100) wrong")
    res.cases += 1
    got = bounds.asymptotic_exponent(math.sqrt(2.0), 0.1, 0.5, 8.0)
    if abs(got - 0.4) > 1e-12:
        res.fail("asymptotic exponent spot value wrong")
    return res


def run_suites(names, seed: int, **size_overrides) -> list[SuiteResult]:
    """Run the selected suites; unknown names raise ValueError."""
    wanted = list(names)
    if "all" in wanted:
        wanted = list(SUITES)
    for name in wanted:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    out = []
    for name in wanted:
        if name == "graph":
            out.append(suite_graph(seed, num_graphs=size_overrides.get("graphs", 1000)))
        elif name == "packing":
            out.append(
                suite_packing(
                    seed,
                    num_datasets=size_overrides.get("datasets", 500),
                    num_curves=size_overrides.get("curves", 60),
                )
            )
        elif name == "collision":
            out.append(suite_collision(seed, trials=size_overrides.get("trials", 1_000_000)))
        elif name == "recall":
            out.append(suite_recall(seed, num_queries=size_overrides.get("queries", 400)))
        elif name == "bounds":
            out.append(suite_bounds(seed))
    return out
