"""dlsh: near-neighbor search with dispersion-aware LSH parameter planning.

The package measures how dispersed a dataset is (near-pair counts over a
radius grid), turns that into sphere-packing lower bounds, and sizes
hash-table parameters (K, L) from those bounds instead of the
worst-case rule. An instrumented index and benchmark harness verify the
bounds empirically.
"""

from .bounds import (
    BoundReport,
    PlanParams,
    SummationBound,
    asymptotic_exponent,
    doubling_packing_lower_bound,
    optimize_beta,
    packing_lower_bound,
    plan_classical,
    plan_doubling,
    plan_exponent,
    plan_refined,
    summation_bound,
)
from .dispersion import (
    CheckResult,
    DispersionProfile,
    DoublingEstimate,
    PackedGraph,
    c_epsilon,
    count_near_pairs,
    estimate_doubling_dim,
    near_graph,
    pack_graph,
    profile,
    verify_packing,
)
from .geometry import (
    Dataset,
    FormatError,
    Metric,
    brute_force_near,
    distance,
    generate,
    load_dataset,
    save_dataset,
)
from .index import LshIndex, QueryStats, build, load_index, query, query_with_budget, save_index
from .lsh_families import ConcatenatedHash, HashFunction, UniformLshFamily

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CheckResult",
    "ConcatenatedHash",
    "Dataset",
    "DispersionProfile",
    "DoublingEstimate",
    "FormatError",
    "HashFunction",
    "LshIndex",
    "Metric",
    "PackedGraph",
    "PlanParams",
    "QueryStats",
    "SummationBound",
    "UniformLshFamily",
    "asymptotic_exponent",
    "brute_force_near",
    "build",
    "c_epsilon",
    "count_near_pairs",
    "distance",
    "doubling_packing_lower_bound",
    "estimate_doubling_dim",
    "generate",
    "load_dataset",
    "load_index",
    "near_graph",
    "optimize_beta",
    "pack_graph",
    "packing_lower_bound",
    "plan_classical",
    "plan_doubling",
    "plan_exponent",
    "plan_refined",
    "profile",
    "query",
    "query_with_budget",
    "save_dataset",
    "save_index",
    "summation_bound",
    "verify_packing",
]
