"""
Chain generators and oracles for the exact finite-chain verifiers.

- torus walks: finite surrogates of a recurrent lattice walk, whose entrance
  measure has a closed tail form
- random irreducible chains for the randomized suite
- a truncated Neumann series for the first-passage solves
- a Monte Carlo simulator of entrance and exit events
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import DEFAULT_SEED, MAX_THREADS, PMF_SUM_TOL, PRODUCT_STATE_CAP
from finite_chains.kernels import FiniteChain, as_mask, blocks, dual, entrance_exit_measures
from finite_chains.verify import (
    IdentityReport,
    guarded,
    verify_bijection,
    verify_duality,
    verify_kac,
    verify_product_reduction,
    verify_invariance,
)
from increments.rng import RngState
from utils.errors import ConfigurationError, OvershootLabError

logger = logging.getLogger(__name__)

NEUMANN_TERMS = 200
SUITE_CHAINS = 50
SUITE_SIZES = (3, 30)
SUITE_PRODUCT_MAX = 12
DUAL_INVOLUTION_TOL = 1e-14
TORUS_TOL = 1e-12

PmfLike = Union[Dict, Sequence[Tuple]]


# ---------------------------------------------------------------------- #
# Torus walks
# ---------------------------------------------------------------------- #
def _steps(d: int, pmf: PmfLike) -> Tuple[np.ndarray, np.ndarray]:
    """Increments as an (k, d) integer array with their probabilities."""
    items = list(pmf.items()) if isinstance(pmf, dict) else [tuple(p) for p in pmf]
    if not items:
        raise ConfigurationError("pmf is empty", field="pmf")
    steps = [np.atleast_1d(np.asarray(s, dtype=np.int64)) for s, _ in items]
    probs = np.array([float(p) for _, p in items])
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > PMF_SUM_TOL:
        raise ConfigurationError("pmf weights must be nonnegative and sum to 1", field="pmf")

    if all(s.size == 1 for s in steps) and d > 1:
        # scalar steps in d dimensions: independent coordinates
        scalar = np.array([s[0] for s in steps])
        grid = np.array(list(product(scalar, repeat=d)))
        weights = np.prod(np.array(list(product(probs, repeat=d))), axis=1)
        return grid, weights
    if any(s.size != d for s in steps):
        raise ConfigurationError(f"increments must have {d} coordinates", field="pmf")
    return np.vstack(steps), probs


def _check_wraparound(steps: np.ndarray, m: int):
    if np.any(np.abs(steps) >= m):
        raise ConfigurationError(f"increment support reaches the torus side m={m}: wraparound is ambiguous",
                                 field="pmf")
    residues = {tuple(s % m) for s in steps}
    if len(residues) != len(steps):
        raise ConfigurationError(f"distinct increments coincide modulo m={m}", field="pmf")


def _torus_index(coords: np.ndarray, m: int) -> np.ndarray:
    """Row-major state index of integer coordinates taken modulo m."""
    coords = np.mod(np.atleast_2d(coords), m)
    index = np.zeros(coords.shape[0], dtype=np.int64)
    for j in range(coords.shape[1]):
        index = index * m + coords[:, j]
    return index


def torus_states(d: int, m: int) -> np.ndarray:
    """All points of (Z/mZ)^d in state order, shape (m**d, d)."""
    return np.array(list(product(range(m), repeat=d)), dtype=np.int64)


def torus_walk(d: int, m: int, pmf: PmfLike, A=None) -> FiniteChain:
    """
    Random walk on the discrete torus (Z/mZ)^d.

    Args:
        d: Dimension, 1 or 2
        m: Side length, at least 3
        pmf: Increments {step: probability}; scalar steps with d=2 give the
            product walk with independent coordinates
        A: Optional subset (indices or mask)

    Returns:
        FiniteChain whose uniform law is stationary
    """
    if d not in (1, 2):
        raise ConfigurationError("torus walks are defined for d = 1 or 2", field="d")
    if m < 3:
        raise ConfigurationError("torus side must be at least 3", field="m")
    steps, probs = _steps(d, pmf)
    _check_wraparound(steps, m)

    points = torus_states(d, m)
    n = points.shape[0]
    P = np.zeros((n, n))
    rows = np.arange(n)
    for step, p in zip(steps, probs):
        P[rows, _torus_index(points + step, m)] += p
    labels = [int(x[0]) for x in points] if d == 1 else [tuple(int(c) for c in x) for x in points]
    return FiniteChain(P, labels, A, name=f"torus_d{d}_m{m}")


def torus_box(d: int, m: int, lower: Sequence[int], upper: Sequence[int]) -> np.ndarray:
    """Mask of the sub-box lower <= x <= upper (coordinatewise) of the torus."""
    points = torus_states(d, m)
    lower = np.broadcast_to(np.asarray(lower, dtype=np.int64), (d,))
    upper = np.broadcast_to(np.asarray(upper, dtype=np.int64), (d,))
    return np.all((points >= lower) & (points <= upper), axis=1)


def torus_tail_form(d: int, m: int, pmf: PmfLike, A) -> np.ndarray:
    """
    Entrance measure in tail form: P(X_1 in x - A^c) times the uniform mass,
    for x in A (zero elsewhere). Built from the increments alone.
    """
    steps, probs = _steps(d, pmf)
    points = torus_states(d, m)
    mask = as_mask(A, points.shape[0])
    density = np.zeros(points.shape[0])
    for step, p in zip(steps, probs):
        came_from_outside = ~mask[_torus_index(points - step, m)]
        density += p * came_from_outside
    return np.where(mask, density / points.shape[0], 0.0)


def torus_entrance_check(d: int, m: int, pmf: PmfLike, A) -> IdentityReport:
    """Entrance measure from the dual-chain formula against the tail form."""
    report = IdentityReport("torus_entrance")
    chain = torus_walk(d, m, pmf, A)
    uniform = np.full(chain.n, 1.0 / chain.n)
    report.add("stationary_uniform", np.max(np.abs(uniform @ chain.P - uniform)), TORUS_TOL)
    measures = entrance_exit_measures(chain.P, uniform, chain.A)
    tail = torus_tail_form(d, m, pmf, chain.A)
    report.add("tail_form", np.max(np.abs(measures.entrance - tail)), TORUS_TOL)
    report.info["mass"] = measures.mass
    return report


# ---------------------------------------------------------------------- #
# Random chains
# ---------------------------------------------------------------------- #
def random_irreducible_chain(rng: RngState, n: Optional[int] = None,
                             sizes: Tuple[int, int] = SUITE_SIZES, name: str = "random") -> FiniteChain:
    """
    Dirichlet(1, ..., 1) rows mixed with a random Hamiltonian cycle, which
    makes the chain irreducible, and a random nontrivial subset A.
    """
    g = rng.generator
    if n is None:
        n = int(g.integers(sizes[0], sizes[1] + 1))
    if n < 2:
        raise ConfigurationError("a nontrivial subset needs at least 2 states", field="n")
    rows = g.dirichlet(np.ones(n), size=n)
    order = g.permutation(n)
    cycle = np.zeros((n, n))
    cycle[order, np.roll(order, -1)] = 1.0
    P = 0.5 * rows + 0.5 * cycle
    P /= P.sum(axis=1, keepdims=True)
    size_A = int(g.integers(1, n))
    A = np.sort(g.choice(n, size=size_A, replace=False))
    return FiniteChain(P, A=A, name=name)


# ---------------------------------------------------------------------- #
# Oracles
# ---------------------------------------------------------------------- #
def neumann_apply(Q: np.ndarray, B: np.ndarray, terms: int = NEUMANN_TERMS, left: bool = False) -> np.ndarray:
    """Truncated series sum_{k<=terms} Q^k B (or B Q^k when left=True)."""
    out = np.array(B, dtype=np.float64, copy=True)
    term = out.copy()
    for _ in range(terms):
        term = term @ Q if left else Q @ term
        out += term
    return out


def neumann_induced_kernel(P: np.ndarray, A, terms: int = NEUMANN_TERMS) -> np.ndarray:
    """R + U (sum_k Q^k) V by path enumeration up to `terms` excursion steps."""
    b = blocks(P, A)
    return b.R + b.U @ neumann_apply(b.Q, b.V, terms)


def neumann_entrance_kernel(P: np.ndarray, A, terms: int = NEUMANN_TERMS) -> np.ndarray:
    b = blocks(P, A)
    return neumann_apply(b.R, b.U @ neumann_apply(b.Q, b.V, terms), terms)


@dataclass
class EventCounts:
    """Transition counts between consecutive entrance points and exit points."""

    entrance: np.ndarray
    exit: np.ndarray
    steps: int

    def empirical(self, which: str = "entrance") -> np.ndarray:
        counts = getattr(self, which)
        totals = counts.sum(axis=1, keepdims=True)
        return np.divide(counts, totals, out=np.zeros_like(counts, dtype=np.float64), where=totals > 0)


def simulate_entrance_exit(P: np.ndarray, A, rng: RngState, steps: int,
                           walkers: int = 1000, mu: Optional[np.ndarray] = None) -> EventCounts:
    """
    Run independent copies of the chain and count the moves of its entrance
    chain (consecutive entrance points into A) and exit chain (consecutive
    last positions in A^c before an entrance).

    Walkers start from mu when given, else uniformly.
    """
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    mask = as_mask(A, n)
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    g = rng.generator
    start_law = np.full(n, 1.0 / n) if mu is None else np.asarray(mu, dtype=np.float64)
    state = g.choice(n, size=walkers, p=start_law / start_law.sum())

    entrance = np.zeros((n, n), dtype=np.int64)
    exit_ = np.zeros((n, n), dtype=np.int64)
    last_entrance = np.full(walkers, -1)
    last_exit = np.full(walkers, -1)
    for _ in range(steps):
        u = g.random(walkers)
        nxt = (cum[state] < u[:, None]).sum(axis=1)
        event = ~mask[state] & mask[nxt]
        if event.any():
            seen = event & (last_entrance >= 0)
            np.add.at(entrance, (last_entrance[seen], nxt[seen]), 1)
            np.add.at(exit_, (last_exit[seen], state[seen]), 1)
            last_entrance[event] = nxt[event]
            last_exit[event] = state[event]
        state = nxt
    return EventCounts(entrance, exit_, steps * walkers)


# ---------------------------------------------------------------------- #
# Randomized suite
# ---------------------------------------------------------------------- #
@dataclass
class SuiteResult:
    table: pd.DataFrame
    maxima: Dict[str, float]
    failures: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict:
        return {"chains": int(len(self.table)), "passed": self.passed,
                "maxima": self.maxima, "tolerances": self.tolerances, "failures": self.failures,
                "runtime_ms": self.runtime_ms}


def check_chain(chain: FiniteChain, product_max: int = SUITE_PRODUCT_MAX,
                product_cap: int = PRODUCT_STATE_CAP) -> Dict[str, IdentityReport]:
    """Every exact identity on one chain with its subset."""
    P, A = chain.P, chain.A
    try:
        mu = chain.mu
    except OvershootLabError as e:
        return {"all": IdentityReport("all", skipped=str(e))}
    involution = IdentityReport("dual")
    involution.add("involution", np.max(np.abs(dual(dual(P, mu), mu) - P)), DUAL_INVOLUTION_TOL)
    reports = {
        "dual": involution,
        "invariance": guarded("invariance", verify_invariance, P, mu, A),
        "kac": guarded("kac", verify_kac, P, mu, A),
        "duality": guarded("duality", verify_duality, P, mu, A),
        "bijection": guarded("bijection", verify_bijection, P, A),
    }
    if chain.n <= product_max:
        reports["product_reduction"] = guarded("product_reduction", verify_product_reduction,
                                               P, mu, A, cap=product_cap)
    return reports


def _suite_row(index: int, chain: FiniteChain, reports: Dict[str, IdentityReport]) -> Dict:
    row = {"chain": index, "states": chain.n, "size_A": int(chain.A.sum()), "passed": True}
    for group, report in reports.items():
        if report.skipped:
            row[f"{group}.skipped"] = report.skipped
        if report.error:
            row[f"{group}.error"] = report.error
        for key, value in report.residuals.items():
            row[f"{group}.{key}"] = value
        row["passed"] = row["passed"] and report.passed
    return row


def run_finite_suite(count: int = SUITE_CHAINS, seed: int = DEFAULT_SEED,
                     threads: int = MAX_THREADS, sizes: Tuple[int, int] = SUITE_SIZES,
                     product_max: int = SUITE_PRODUCT_MAX, show_progress: bool = True) -> SuiteResult:
    """
    Verify every identity on `count` seeded random irreducible chains.

    Chain i is drawn from stream (seed, i), so the table does not depend on
    the number of threads.
    """
    if count < 1:
        raise ConfigurationError("suite needs at least one chain", field="count")
    started = time.perf_counter()

    def task(i: int) -> Tuple[Dict, Dict[str, float]]:
        chain = random_irreducible_chain(RngState(seed, i), sizes=sizes, name=f"chain_{i}")
        reports = check_chain(chain, product_max)
        tols = {f"{group}.{k}": tol for group, report in reports.items() for k, tol in report.tolerances.items()}
        return _suite_row(i, chain, reports), tols

    rows: List[Optional[Dict]] = [None] * count
    tolerances: Dict[str, float] = {}
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        futures = {executor.submit(task, i): i for i in range(count)}
        with tqdm(total=count, desc="Finite chains", disable=not show_progress) as pbar:
            for future in as_completed(futures):
                rows[futures[future]], tols = future.result()
                tolerances.update(tols)
                pbar.update(1)

    table = pd.DataFrame(rows)
    residual_cols = [c for c in table.columns if "." in c and not c.endswith((".skipped", ".error"))]
    maxima = {c: float(table[c].max(skipna=True)) for c in residual_cols}
    failures = [f"chain_{r['chain']}" for r in rows if not r["passed"]]
    if failures:
        logger.warning(f"{len(failures)} of {count} chains failed: {failures}")
    else:
        logger.info(f"All {count} chains passed")
    return SuiteResult(table, maxima, failures, dict(sorted(tolerances.items())),
                       (time.perf_counter() - started) * 1000.0)


# Example usage
if __name__ == "__main__":
    report = torus_entrance_check(2, 4, {1: 0.5, -1: 0.5}, torus_box(2, 4, 0, 1))
    print(f"Torus check: {report.to_dict()}")

    result = run_finite_suite(count=10)
    print(result.table.head())
    for key, value in result.maxima.items():
        print(f"  {key}: {value:.3e}")
