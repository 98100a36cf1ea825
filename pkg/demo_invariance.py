#!/usr/bin/env python3.11
"""
Demo script to show an invariance test on a small sample.
"""

from evals.invariance import ChainKind, invariance_test
from increments.laws import law_from_spec

# Initialize
law = law_from_spec({"family": "laplace_unit"})

# Push 20000 draws of pi_+ one step through the overshoot chain
print(f'Law: {law}\n')
verdict = invariance_test(law, ChainKind.O, steps=1, N=20_000, seed=7, replicas=4, threads=4)

# Show results
print('='*60)
print(f'{verdict.name}: {verdict.statistic} = {verdict.value:.5f} (threshold {verdict.threshold:.5f})')
print(f'Passed: {verdict.passed}')
print(f'Streams: {verdict.manifest}')
print('='*60)
print(verdict.frame.head())
