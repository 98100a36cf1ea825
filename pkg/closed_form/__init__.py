"""Closed-form invariant densities and their samplers."""

from .densities import (
    DensityOnGroup,
    abs_first_moment_pi,
    entrance_probability,
    exit_probability,
    first_moment_check,
    hit_probability,
    lambda_entr_density,
    lambda_exit_density,
    pi_density,
    pi_minus_density,
    pi_plus_density,
    quad_piecewise,
    sample_from,
)

__all__ = [
    "DensityOnGroup",
    "abs_first_moment_pi",
    "entrance_probability",
    "exit_probability",
    "first_moment_check",
    "hit_probability",
    "lambda_entr_density",
    "lambda_exit_density",
    "pi_density",
    "pi_minus_density",
    "pi_plus_density",
    "quad_piecewise",
    "sample_from",
]
