"""Statistical verification of the closed-form measures and limit theorems."""

from .summary import (
    EmpiricalSummary,
    TestVerdict,
    ecdf_frame,
    ks_distance,
    map_replicas,
    multinomial_verdict,
    relative_error,
    split_counts,
)
from .invariance import ChainKind, chain_target, invariance_propagation, invariance_test
from .crossings import CLT_TARGET, PERKINS_TARGET, clt_cdf, clt_levelcrossings, clt_trend, lln_overshoots, perkins_sum
from .occupation import (
    OccupationVariant,
    StartKind,
    occupation_identity,
    occupation_identity_all,
    upcrossing_expectation,
    upcrossing_target,
)
from .hopf import hopf_ratio_test
from .runner import ExperimentRunner, RunOutcome, dump_density, list_experiments

__all__ = [
    "EmpiricalSummary",
    "TestVerdict",
    "ecdf_frame",
    "ks_distance",
    "map_replicas",
    "multinomial_verdict",
    "relative_error",
    "split_counts",
    "ChainKind",
    "chain_target",
    "invariance_propagation",
    "invariance_test",
    "CLT_TARGET",
    "PERKINS_TARGET",
    "clt_cdf",
    "clt_levelcrossings",
    "clt_trend",
    "lln_overshoots",
    "perkins_sum",
    "OccupationVariant",
    "StartKind",
    "occupation_identity",
    "occupation_identity_all",
    "upcrossing_expectation",
    "upcrossing_target",
    "hopf_ratio_test",
    "ExperimentRunner",
    "RunOutcome",
    "dump_density",
    "list_experiments",
]
