#!/usr/bin/env python3.11
"""
Demo script to show the closed-form measures of two walks.
"""

from closed_form.densities import first_moment_check, pi_density, pi_plus_density
from increments.laws import law_from_spec

# Initialize
lattice = law_from_spec({"family": "lattice_pmf", "params": {"pmf": [["1", "2/3"], ["-2", "1/3"]]}})
laplace = law_from_spec({"family": "laplace_unit"})

# Lattice weights of pi
print('='*60)
print(f'📐 pi for {lattice}')
print('='*60)
for point, weight in pi_density(lattice).weights().items():
    print(f'  pi({point:+.0f}) = {weight:.6f}')

# Continuum pi_+ is Exp(1) for the unit Laplace law
print('\n' + '='*60)
print(f'📐 pi_+ for {laplace}')
print('='*60)
plus = pi_plus_density(laplace)
for x in (0.5, 1.0, 2.0):
    print(f'  F({x}) = {float(plus.cdf(x)):.6f}')

# Three routes to the first absolute moment of pi
print('\n' + '='*60)
print('∫|y| pi(dy)')
print('='*60)
for law in (lattice, laplace):
    routes = first_moment_check(law)
    print(f'  {law.family.value}: ' + ', '.join(f'{k} = {v:.10f}' for k, v in routes.items()))
