#!/usr/bin/env python3.11
"""
Demo script to show the exact identities on a torus walk and on one random chain.
"""

from finite_chains.suite import check_chain, random_irreducible_chain, torus_box, torus_entrance_check
from increments.rng import RngState

# Step 1: entrance measure of a 2x2 box on the 4x4 torus
print('Checking the torus entrance measure...\n')
report = torus_entrance_check(2, 4, {1: 0.5, -1: 0.5}, torus_box(2, 4, [0, 0], [1, 1]))
print('='*60)
for key, value in report.residuals.items():
    print(f'  {key}: {value:.3e} (tolerance {report.tolerances[key]:.0e})')
print(f'Passed: {report.passed}')
print('='*60)

# Step 2: every identity group on a random chain
chain = random_irreducible_chain(RngState(2024, 0), n=8)
print(f'\nChain {chain.name}: {chain.n} states, A = {chain.A.nonzero()[0].tolist()}\n')
for group, result in check_chain(chain).items():
    status = '✓' if result.passed else '✗'
    print(f'  {status} {group}: max residual {result.max_residual:.3e}')
