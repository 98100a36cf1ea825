"""Exact entrance/exit/induced chain algebra on finite state spaces."""

from .kernels import (
    DerivedKernels,
    EntranceExitMeasures,
    FiniteChain,
    as_mask,
    communicating_classes,
    derive_kernels,
    dual,
    entrance_exit_measures,
    entrance_kernel,
    exit_kernel,
    exit_states,
    gth_solve,
    induced_kernel,
    kac_lift,
    kac_lift_entrance,
    lift_entrance_measure,
    stationary,
)
from .suite import (
    EventCounts,
    SuiteResult,
    check_chain,
    neumann_apply,
    neumann_entrance_kernel,
    neumann_induced_kernel,
    random_irreducible_chain,
    run_finite_suite,
    simulate_entrance_exit,
    torus_box,
    torus_entrance_check,
    torus_tail_form,
    torus_walk,
)
from .verify import (
    IdentityReport,
    verify_all,
    verify_bijection,
    verify_duality,
    verify_kac,
    verify_product_reduction,
    verify_invariance,
)

__all__ = [
    "DerivedKernels",
    "EntranceExitMeasures",
    "EventCounts",
    "FiniteChain",
    "IdentityReport",
    "SuiteResult",
    "as_mask",
    "check_chain",
    "communicating_classes",
    "derive_kernels",
    "dual",
    "entrance_exit_measures",
    "entrance_kernel",
    "exit_kernel",
    "exit_states",
    "gth_solve",
    "induced_kernel",
    "kac_lift",
    "kac_lift_entrance",
    "lift_entrance_measure",
    "neumann_apply",
    "neumann_entrance_kernel",
    "neumann_induced_kernel",
    "random_irreducible_chain",
    "run_finite_suite",
    "simulate_entrance_exit",
    "stationary",
    "torus_box",
    "torus_entrance_check",
    "torus_tail_form",
    "torus_walk",
    "verify_all",
    "verify_bijection",
    "verify_duality",
    "verify_kac",
    "verify_product_reduction",
    "verify_invariance",
]
