"""Command-line front end: gen / profile / plan / build / query / bench / verify.

Every command is reproducible from its arguments plus ``--seed``; all
tabular output is CSV with a header row. Exit codes: 0 success, 1
verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys

import numpy as np

from . import bench as bench_mod
from . import bounds, dispersion, geometry, index as index_mod, verify
from .geometry import FormatError, Metric
from .lsh_families import UniformLshFamily

PLAN_COLUMNS = (
    "mode",
    "alpha",
    "beta",
    "n",
    "n_beta",
    "d_or_d0",
    "K",
    "L",
    "M",
    "predicted_cost",
    "exponent",
)

_MODE_ALIASES = {
    "refined": "refined_dim",
    "refined_dim": "refined_dim",
    "doubling": "refined_doubling",
    "refined_doubling": "refined_doubling",
    "classical": "classical",
}


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


@contextlib.contextmanager
def _open_out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _family(args, metric: Metric) -> UniformLshFamily:
    return UniformLshFamily(metric=metric, r=args.r, rho_model=args.rho_model)


def _profile(args, ds) -> dispersion.DispersionProfile:
    return dispersion.profile(ds, args.r, args.betas)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--out", default=None, help="output file ('-' = stdout)")
    common.add_argument("--format", choices=["csv"], default="csv")

    planner = argparse.ArgumentParser(add_help=False)
    planner.add_argument("--r", type=float, required=True, help="base radius")
    planner.add_argument("--alpha", type=float, default=2.0)
    planner.add_argument("--delta", type=float, default=0.1)
    planner.add_argument("--betas", type=_floats, default=[1.0, 2.0, 4.0])
    planner.add_argument("--eps", type=float, default=0.1)
    planner.add_argument("--d0", type=float, default=None, help="doubling dim override")
    planner.add_argument(
        "--rho-model",
        choices=["inverse_s", "inverse_s_squared", "tabulated"],
        default="inverse_s",
    )

    p = argparse.ArgumentParser(prog="dlsh", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a dataset file")
    g.add_argument("--kind", choices=geometry.GeneratorKind, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--metric", choices=["l2", "l1"], default="l2")
    g.add_argument("--gap", type=float, default=1.0)
    g.add_argument("--clusters", type=int, default=4)
    g.add_argument("--sigma", type=float, default=0.1)
    g.add_argument("--density", type=float, default=0.1)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--waviness", type=float, default=0.25)

    pr = sub.add_parser("profile", parents=[common], help="near-pair profile CSV")
    pr.add_argument("--data", required=True)
    pr.add_argument("--r", type=float, required=True)
    pr.add_argument("--betas", type=_floats, default=[1.0, 2.0, 4.0])
    pr.add_argument("--eps", type=float, default=0.1)

    pl = sub.add_parser("plan", parents=[common, planner], help="parameter plans CSV")
    pl.add_argument("--data", required=True)

    b = sub.add_parser("build", parents=[common, planner], help="build an index file")
    b.add_argument("--data", required=True)
    b.add_argument(
        "--mode", choices=sorted(_MODE_ALIASES), default="refined", help="plan mode"
    )

    q = sub.add_parser("query", parents=[common], help="answer one query")
    q.add_argument("--index", required=True)
    q.add_argument("--data", required=True)
    q.add_argument("--point", type=_floats, required=True)
    q.add_argument("--budget", type=int, default=None)

    be = sub.add_parser("bench", parents=[common, planner], help="benchmark plans")
    be.add_argument("--data", required=True)
    be.add_argument("--modes", default="refined,classical")
    be.add_argument("--queries", type=int, default=200)
    be.add_argument("--planted", action="store_true")
    be.add_argument("--rebuilds", type=int, default=1)
    be.add_argument("--budget", type=int, default=None)
    be.add_argument("--dataset-id", default=None)

    v = sub.add_parser("verify", parents=[common], help="run property suites")
    v.add_argument("--suite", default="all")
    v.add_argument("--graphs", type=int, default=1000)
    v.add_argument("--datasets", type=int, default=500)
    v.add_argument("--curves", type=int, default=60)
    v.add_argument("--trials", type=int, default=1_000_000)
    v.add_argument("--queries", type=int, default=400)
    return p


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    ds = geometry.generate(
        args.kind,
        args.n,
        args.d,
        args.seed,
        metric=Metric.L2 if args.metric == "l2" else Metric.L1,
        gap=args.gap,
        clusters=args.clusters,
        sigma=args.sigma,
        density=args.density,
        scale=args.scale,
        waviness=args.waviness,
    )
    if args.out in (None, "-"):
        raise ValueError("gen requires --out FILE (binary .dlsh or .csv)")
    geometry.save_dataset(ds, args.out)
    print(f"n={ds.n} d={ds.dim} metric={ds.metric.name.lower()}")
    return 0


def cmd_profile(args) -> int:
    ds = geometry.load_dataset(args.data)
    prof = dispersion.profile(ds, args.r, args.betas)
    with _open_out(args.out) as fh:
        dispersion.write_profile_csv(prof, fh)
    c_eps = dispersion.c_epsilon(prof, args.eps)
    est = dispersion.estimate_doubling_dim(ds, seed=args.seed)
    print(
        f"c_eps(eps={args.eps})={_show(c_eps)} d0={est.d0:.4f} "
        f"method={est.method} scales={est.scales_used}",
        file=sys.stderr,
    )
    return 0


def _show(c_eps) -> str:
    if c_eps is None:
        return "none"
    if math.isinf(c_eps):
        return "unbounded"
    return repr(c_eps)


def _plan_rows(args, ds, prof, family, d0: float):
    n = ds.n
    rows = []
    refined = bounds.optimize_beta(prof, ds.dim, args.alpha, args.delta, family, "refined_dim")
    doubling = bounds.optimize_beta(prof, d0, args.alpha, args.delta, family, "refined_doubling")
    classical = bounds.plan_classical(n, args.alpha, args.delta, family)
    count_at = dict(zip(prof.betas, prof.counts))
    for plan, d_used in ((refined, float(ds.dim)), (doubling, d0), (classical, float(ds.dim))):
        n_beta = (
            n * (n - 1) // 2 if plan.mode == "classical" else count_at[plan.beta]
        )
        rows.append(
            [
                plan.mode,
                repr(plan.alpha),
                repr(plan.beta),
                str(n),
                str(n_beta),
                repr(d_used),
                str(plan.K),
                str(plan.L),
                repr(plan.M),
                repr(plan.predicted_cost),
                repr(bounds.plan_exponent(plan, n)),
            ]
        )
    return rows, (refined, doubling, classical)


def cmd_plan(args) -> int:
    ds = geometry.load_dataset(args.data)
    family = _family(args, ds.metric)
    prof = _profile(args, ds)
    d0 = args.d0 if args.d0 is not None else dispersion.estimate_doubling_dim(ds, args.seed).d0
    rows, _plans = _plan_rows(args, ds, prof, family, d0)
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(PLAN_COLUMNS)
        w.writerows(rows)
    c_eps = dispersion.c_epsilon(prof, args.eps)
    xi = min(1.0, d0 / math.log2(ds.n)) if ds.n > 1 else 0.0
    if c_eps is not None:
        exp = bounds.asymptotic_exponent(args.alpha, args.eps, xi, c_eps)
        print(
            f"c_eps={_show(c_eps)} d0={d0:.4f} xi={xi:.4f} asymptotic_exponent={exp:.6f}",
            file=sys.stderr,
        )
    else:
        print(f"c_eps=none d0={d0:.4f} xi={xi:.4f}", file=sys.stderr)
    return 0


def cmd_build(args) -> int:
    if args.out in (None, "-"):
        raise ValueError("build requires --out FILE for the index")
    ds = geometry.load_dataset(args.data)
    family = _family(args, ds.metric)
    mode = _MODE_ALIASES[args.mode]
    if mode == "classical":
        plan = bounds.plan_classical(ds.n, args.alpha, args.delta, family)
    else:
        prof = _profile(args, ds)
        d0 = args.d0 if args.d0 is not None else dispersion.estimate_doubling_dim(ds, args.seed).d0
        d_or_d0 = d0 if mode == "refined_doubling" else ds.dim
        plan = bounds.optimize_beta(prof, d_or_d0, args.alpha, args.delta, family, mode)
    idx = index_mod.build(ds, plan, family, args.seed)
    index_mod.save_index(idx, args.out)
    print(f"mode={plan.mode} K={plan.K} L={plan.L} beta={plan.beta}")
    return 0


def cmd_query(args) -> int:
    ds = geometry.load_dataset(args.data)
    idx = index_mod.load_index(args.index, ds)
    stats = index_mod.query(idx, np.asarray(args.point), max_candidates=args.budget)
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "outcome",
                "found_index",
                "found_distance",
                "rounds",
                "candidates",
                "far_candidates",
                "distance_computations",
                "truncated",
                "hash_eval_seconds",
            ]
        )
        w.writerow(
            [
                stats.outcome,
                "" if stats.found_index is None else stats.found_index,
                "" if stats.found_distance is None else repr(stats.found_distance),
                stats.rounds_executed,
                stats.candidates_examined,
                stats.far_candidates,
                stats.distance_computations,
                int(stats.truncated),
                repr(stats.hash_eval_seconds),
            ]
        )
    return 0


def cmd_bench(args) -> int:
    ds = geometry.load_dataset(args.data)
    family = _family(args, ds.metric)
    modes = []
    for tok in args.modes.split(","):
        tok = tok.strip()
        if tok not in _MODE_ALIASES:
            raise ValueError(f"unknown mode {tok!r}")
        modes.append(_MODE_ALIASES[tok])
    prof = _profile(args, ds)
    d0 = args.d0 if args.d0 is not None else dispersion.estimate_doubling_dim(ds, args.seed).d0
    count_at = dict(zip(prof.betas, prof.counts))
    plans = []
    n_beta_by_mode: dict[str, int] = {}
    d_by_mode: dict[str, float] = {}
    for mode in modes:
        if mode == "classical":
            plan = bounds.plan_classical(ds.n, args.alpha, args.delta, family)
            n_beta_by_mode[mode] = ds.n * (ds.n - 1) // 2
            d_by_mode[mode] = float(ds.dim)
        else:
            d_or_d0 = d0 if mode == "refined_doubling" else float(ds.dim)
            plan = bounds.optimize_beta(prof, d_or_d0, args.alpha, args.delta, family, mode)
            n_beta_by_mode[mode] = count_at[plan.beta]
            d_by_mode[mode] = d_or_d0
        plans.append(plan)
    records = bench_mod.run_bench(
        ds,
        args.dataset_id or args.data,
        plans,
        family,
        args.queries,
        args.planted,
        args.seed,
        n_beta_by_mode=n_beta_by_mode,
        d_or_d0_by_mode=d_by_mode,
        rebuilds=args.rebuilds,
        budget=args.budget,
    )
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(bench_mod.BENCH_COLUMNS)
        for rec in records:
            w.writerow(bench_mod.record_row(rec))
    return 0


def cmd_verify(args) -> int:
    names = [tok.strip() for tok in args.suite.split(",") if tok.strip()]
    results = verify.run_suites(
        names,
        args.seed,
        graphs=args.graphs,
        datasets=args.datasets,
        curves=args.curves,
        trials=args.trials,
        queries=args.queries,
    )
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(["suite", "cases", "failures", "status"])
        for res in results:
            w.writerow([res.name, res.cases, res.failures, "pass" if res.ok else "fail"])
    failed = False
    for res in results:
        for msg in res.messages:
            print(f"counterexample[{res.name}]: {msg}", file=sys.stderr)
        failed = failed or not res.ok
    return 1 if failed else 0


_COMMANDS = {
    "gen": cmd_gen,
    "profile": cmd_profile,
    "plan": cmd_plan,
    "build": cmd_build,
    "query": cmd_query,
    "bench": cmd_bench,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
