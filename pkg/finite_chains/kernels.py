"""
Exact first-passage linear algebra for finite Markov chains.

With the states split into A and A^c, the transition matrix has blocks
R = P[A, A], U = P[A, A^c], V = P[A^c, A] and Q = P[A^c, A^c]. The induced,
entrance and exit kernels and the Kac lifts are all products of these blocks
with the fundamental matrices (I - R)^{-1} and (I - Q)^{-1}.

Measures are full-length vectors over all states (zero off their domain);
kernels are square matrices over an explicit index set.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from config import MAX_CHAIN_STATES, ROW_SUM_TOL, STATIONARY_TOL, SUPPORT_THRESHOLD
from utils.errors import ConfigurationError, ConsistencyError, DomainError, StructuralError

logger = logging.getLogger(__name__)

_REFINEMENT_STEPS = 2


# ---------------------------------------------------------------------- #
# Chains
# ---------------------------------------------------------------------- #
@dataclass
class FiniteChain:
    """A finite row-stochastic kernel with an optional distinguished subset A."""

    P: np.ndarray
    states: List = field(default_factory=list)
    A: Optional[np.ndarray] = None
    name: str = "chain"
    _mu: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise ConfigurationError("transition matrix must be square and nonempty", field="P")
        if P.shape[0] > MAX_CHAIN_STATES:
            raise ConfigurationError(f"{P.shape[0]} states exceed the cap of {MAX_CHAIN_STATES}", field="P")
        if np.any(P < 0):
            raise ConfigurationError("transition matrix has negative entries", field="P")
        worst = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
        if worst > ROW_SUM_TOL:
            raise ConfigurationError(f"rows sum to 1 only within {worst:.3e}", field="P")
        self.P = P
        if not self.states:
            self.states = list(range(P.shape[0]))
        if len(self.states) != P.shape[0]:
            raise ConfigurationError("one label per state is required", field="states")
        if self.A is not None:
            self.A = as_mask(self.A, P.shape[0])

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def mu(self) -> np.ndarray:
        if self._mu is None:
            self._mu = stationary(self.P)
        return self._mu

    @property
    def is_irreducible(self) -> bool:
        return communicating_classes(self.P)[0] == 1

    def with_subset(self, A) -> "FiniteChain":
        chain = FiniteChain(self.P, list(self.states), A, self.name)
        chain._mu = self._mu
        return chain

    @classmethod
    def from_dict(cls, data: Dict, name: str = "chain") -> "FiniteChain":
        """Build from {"states": [...], "P": [[...]], "A": [indices]}."""
        if "P" not in data:
            raise ConfigurationError("chain needs a transition matrix", field="P")
        return cls(np.array(data["P"], dtype=np.float64), list(data.get("states") or []),
                   data.get("A"), data.get("name", name))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FiniteChain":
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f), name=path.stem)

    def to_dict(self) -> Dict:
        return {"name": self.name, "states": self.states, "P": self.P.tolist(),
                "A": None if self.A is None else np.flatnonzero(self.A).tolist()}


def as_mask(A, n: int) -> np.ndarray:
    """Subset given as a boolean mask or a list of indices, as a boolean mask."""
    arr = np.asarray(A)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise DomainError(f"subset mask has shape {arr.shape}, expected ({n},)")
        return arr.copy()
    idx = arr.astype(np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise DomainError(f"subset indices must lie in [0, {n})")
    mask = np.zeros(n, dtype=bool)
    mask[idx] = True
    return mask


# ---------------------------------------------------------------------- #
# Graph structure
# ---------------------------------------------------------------------- #
def _support(P: np.ndarray) -> csr_matrix:
    return csr_matrix(P > SUPPORT_THRESHOLD)


def communicating_classes(P: np.ndarray):
    """(number of strongly connected components, component label per state)."""
    return connected_components(_support(P), directed=True, connection="strong")


def can_reach(P: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Mask of states from which the target set is reachable (target included)."""
    n = P.shape[0]
    reverse = (P > SUPPORT_THRESHOLD).T.astype(np.int8)
    # a virtual root linked to every target state
    graph = np.zeros((n + 1, n + 1), dtype=np.int8)
    graph[:n, :n] = reverse
    graph[n, :n] = target
    order = breadth_first_order(csr_matrix(graph), n, directed=True, return_predecessors=False)
    reached = np.zeros(n, dtype=bool)
    reached[order[order < n]] = True
    return reached


def _require_escape(P: np.ndarray, source: np.ndarray, target: np.ndarray, what: str):
    stuck = source & ~can_reach(P, target)
    if stuck.any():
        raise StructuralError(f"{what} is absorbing: states {np.flatnonzero(stuck).tolist()} never leave it")


# ---------------------------------------------------------------------- #
# Stationary measure and dual
# ---------------------------------------------------------------------- #
def gth_solve(P: np.ndarray) -> np.ndarray:
    """Grassmann-Taksar-Heyman elimination for the stationary row vector."""
    A = np.array(P, dtype=np.float64, copy=True)
    n = A.shape[0]
    for i in range(n - 1):
        scale = A[i, i + 1:].sum()
        if scale <= 0:
            raise StructuralError(f"state {i} cannot reach states above it during elimination")
        A[i + 1:, i] /= scale
        A[i + 1:, i + 1:] += np.outer(A[i + 1:, i], A[i, i + 1:])
    x = np.zeros(n)
    x[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        x[i] = x[i + 1:] @ A[i + 1:, i]
    return x / x.sum()


def stationary(P: np.ndarray) -> np.ndarray:
    """
    Unique stationary probability vector of an irreducible chain.

    Raises:
        StructuralError: if the chain is reducible (components are named)
    """
    P = np.asarray(P, dtype=np.float64)
    count, labels = communicating_classes(P)
    if count != 1:
        groups = [np.flatnonzero(labels == c).tolist() for c in range(count)]
        raise StructuralError(f"reducible chain with communicating classes {groups}")
    mu = gth_solve(P)
    residual = float(np.max(np.abs(mu @ P - mu)))
    if residual > STATIONARY_TOL:
        raise ConsistencyError(f"stationary residual {residual:.3e} exceeds {STATIONARY_TOL:.0e}")
    return mu


def dual(P: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Time reversal P_hat(x, y) = mu(y) P(y, x) / mu(x)."""
    mu = np.asarray(mu, dtype=np.float64)
    if np.any(mu <= 0):
        raise DomainError(f"dual needs mu > 0; zero mass at {np.flatnonzero(mu <= 0).tolist()}")
    return (np.asarray(P).T * mu[None, :]) / mu[:, None]


# ---------------------------------------------------------------------- #
# Blocks and solves
# ---------------------------------------------------------------------- #
@dataclass
class Blocks:
    A: np.ndarray
    idx_A: np.ndarray
    idx_C: np.ndarray
    R: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Q: np.ndarray


def blocks(P: np.ndarray, A) -> Blocks:
    P = np.asarray(P, dtype=np.float64)
    mask = as_mask(A, P.shape[0])
    ia, ic = np.flatnonzero(mask), np.flatnonzero(~mask)
    return Blocks(mask, ia, ic, P[np.ix_(ia, ia)], P[np.ix_(ia, ic)], P[np.ix_(ic, ia)], P[np.ix_(ic, ic)])


def solve_fundamental(M: np.ndarray, B: np.ndarray, left: bool = False) -> np.ndarray:
    """
    (I - M)^{-1} B, or B (I - M)^{-1} when left=True, by LU with partial
    pivoting and iterative refinement.
    """
    n = M.shape[0]
    if n == 0:
        return np.zeros_like(B)
    system = np.eye(n) - M
    if left:
        system, B = system.T, B.T
    lu, piv = linalg.lu_factor(system, check_finite=False)
    if np.any(np.abs(np.diag(lu)) < 1e-300):
        raise StructuralError("first-passage system is singular (absorbing subset)")
    X = linalg.lu_solve((lu, piv), B, check_finite=False)
    for _ in range(_REFINEMENT_STEPS):
        X = X + linalg.lu_solve((lu, piv), B - system @ X, check_finite=False)
    return X.T if left else X


def _nontrivial(b: Blocks, what: str):
    if b.idx_A.size == 0:
        raise DomainError(f"{what}: A is empty")
    if b.idx_C.size == 0:
        raise DomainError(f"{what}: A is the whole state space")


# ---------------------------------------------------------------------- #
# Derived kernels
# ---------------------------------------------------------------------- #
def induced_kernel(P: np.ndarray, A) -> np.ndarray:
    """First-return kernel on A: P_A = R + U (I - Q)^{-1} V."""
    P = np.asarray(P, dtype=np.float64)
    b = blocks(P, A)
    if b.idx_A.size == 0:
        raise DomainError("induced_kernel: A is empty")
    if b.idx_C.size == 0:
        return P.copy()
    _require_escape(P, ~b.A, b.A, "A^c")
    return b.R + b.U @ solve_fundamental(b.Q, b.V)


def _excursion_weights(P: np.ndarray, b: Blocks) -> np.ndarray:
    """(I - R)^{-1} U (I - Q)^{-1}: expected A^c visits before re-entry, per start in A."""
    _require_escape(P, ~b.A, b.A, "A^c")
    _require_escape(P, b.A, ~b.A, "A")
    left = solve_fundamental(b.R, b.U)
    return solve_fundamental(b.Q, left, left=True)


def entrance_kernel(P: np.ndarray, A) -> np.ndarray:
    """Entrance chain kernel on A: E_A = (I - R)^{-1} U (I - Q)^{-1} V."""
    P = np.asarray(P, dtype=np.float64)
    b = blocks(P, A)
    _nontrivial(b, "entrance_kernel")
    return _excursion_weights(P, b) @ b.V


def exit_states(P: np.ndarray, A) -> np.ndarray:
    """A^c_ex: states of A^c with a positive one-step probability into A (as indices)."""
    b = blocks(P, A)
    into_A = b.V.sum(axis=1)
    return b.idx_C[into_A > SUPPORT_THRESHOLD]


def exit_kernel(P: np.ndarray, A, states: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    Exit chain kernel on A^c_ex (or on the given states of A^c).

    Row x conditions one step into A, then follows the walk to its last A^c
    position before the next entrance into A.
    """
    P = np.asarray(P, dtype=np.float64)
    b = blocks(P, A)
    _nontrivial(b, "exit_kernel")
    into_A = np.asarray(P[:, b.idx_A].sum(axis=1))
    rows = exit_states(P, A) if states is None else np.asarray(states, dtype=np.int64)
    bad = rows[(into_A[rows] <= SUPPORT_THRESHOLD) | b.A[rows]]
    if bad.size:
        raise DomainError(f"states {bad.tolist()} have no one-step transition into A")
    W = _excursion_weights(P, b)
    # last-exit probabilities from each start in A, over A^c
    last = W * into_A[b.idx_C][None, :]
    cols = np.searchsorted(b.idx_C, rows)
    step = P[np.ix_(rows, b.idx_A)] / into_A[rows][:, None]
    return (step @ last)[:, cols]


# ---------------------------------------------------------------------- #
# Measures
# ---------------------------------------------------------------------- #
@dataclass
class EntranceExitMeasures:
    """mu_A^entr on A and mu_{A^c}^exit on A^c, as full-length vectors."""

    entrance: np.ndarray
    exit: np.ndarray
    entrance_cross: np.ndarray
    A_en: np.ndarray
    Ac_ex: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.entrance.sum())

    @property
    def degenerate(self) -> bool:
        return self.Ac_ex.size == 0


def entrance_exit_measures(P: np.ndarray, mu: np.ndarray, A) -> EntranceExitMeasures:
    """
    mu_A^entr(x) = mu(x) P_hat_x(Y_1 in A^c) and mu_{A^c}^exit(x) = mu(x) P_x(Y_1 in A).

    The entrance measure is also computed in the cross form
    sum_{y in A^c} mu(y) P(y, x); the two must agree to 1e-12.
    """
    P = np.asarray(P, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    mask = as_mask(A, P.shape[0])
    P_hat = dual(P, mu)
    entrance = np.where(mask, mu * P_hat[:, ~mask].sum(axis=1), 0.0)
    cross = np.where(mask, mu[~mask] @ P[~mask, :], 0.0)
    exit_ = np.where(~mask, mu * P[:, mask].sum(axis=1), 0.0)
    gap = float(np.max(np.abs(entrance - cross))) if mask.any() else 0.0
    if gap > 1e-12:
        raise ConsistencyError(f"entrance measure formulas disagree by {gap:.3e}")
    if not (~mask).any():
        logger.warning("A is the whole state space: exit measure is empty")
    return EntranceExitMeasures(
        entrance=entrance,
        exit=exit_,
        entrance_cross=cross,
        A_en=np.flatnonzero(entrance > SUPPORT_THRESHOLD),
        Ac_ex=np.flatnonzero(exit_ > SUPPORT_THRESHOLD),
    )


def kac_lift(P: np.ndarray, A, nu) -> np.ndarray:
    """nu_bar = nu on A, nu U (I - Q)^{-1} on A^c."""
    P = np.asarray(P, dtype=np.float64)
    b = blocks(P, A)
    nu = _on_subset(nu, b.idx_A, P.shape[0], "nu")
    out = np.zeros(P.shape[0])
    out[b.idx_A] = nu
    if b.idx_C.size:
        _require_escape(P, ~b.A, b.A, "A^c")
        out[b.idx_C] = solve_fundamental(b.Q, nu @ b.U, left=True)
    return out


def lift_entrance_measure(P: np.ndarray, A, nu_entr) -> np.ndarray:
    """Occupation measure up to the next entrance into A, started from nu_entr on A."""
    P = np.asarray(P, dtype=np.float64)
    b = blocks(P, A)
    _nontrivial(b, "lift_entrance_measure")
    nu = _on_subset(nu_entr, b.idx_A, P.shape[0], "nu_entr")
    _require_escape(P, ~b.A, b.A, "A^c")
    _require_escape(P, b.A, ~b.A, "A")
    in_A = solve_fundamental(b.R, nu, left=True)
    out = np.zeros(P.shape[0])
    out[b.idx_A] = in_A
    out[b.idx_C] = solve_fundamental(b.Q, in_A @ b.U, left=True)
    return out


def kac_lift_entrance(P: np.ndarray, mu: np.ndarray, A) -> np.ndarray:
    """Lift of mu_A^entr through occupation until the next entrance; reproduces mu."""
    measures = entrance_exit_measures(P, mu, A)
    return lift_entrance_measure(P, A, measures.entrance)


def _on_subset(nu, idx: np.ndarray, n: int, what: str) -> np.ndarray:
    nu = np.asarray(nu, dtype=np.float64)
    if nu.shape == (n,):
        off = np.delete(nu, idx)
        if np.any(np.abs(off) > 0):
            raise DomainError(f"{what} must be supported on A")
        return nu[idx]
    if nu.shape == (idx.size,):
        return nu
    raise DomainError(f"{what} has length {nu.size}; expected {n} or {idx.size}")


# ---------------------------------------------------------------------- #
# Everything at once
# ---------------------------------------------------------------------- #
@dataclass
class DerivedKernels:
    """Dual, induced, entrance and exit kernels of one chain and subset."""

    P_hat: np.ndarray
    induced: np.ndarray
    entrance: np.ndarray
    exit: np.ndarray
    mu_A: np.ndarray
    measures: EntranceExitMeasures
    idx_A: np.ndarray
    idx_C: np.ndarray

    @property
    def A_en(self) -> np.ndarray:
        return self.measures.A_en

    @property
    def Ac_ex(self) -> np.ndarray:
        return self.measures.Ac_ex


def derive_kernels(P: np.ndarray, mu: np.ndarray, A) -> DerivedKernels:
    P = np.asarray(P, dtype=np.float64)
    b = blocks(P, A)
    _nontrivial(b, "derive_kernels")
    return DerivedKernels(
        P_hat=dual(P, mu),
        induced=induced_kernel(P, b.A),
        entrance=entrance_kernel(P, b.A),
        exit=exit_kernel(P, b.A),
        mu_A=np.where(b.A, mu, 0.0),
        measures=entrance_exit_measures(P, mu, b.A),
        idx_A=b.idx_A,
        idx_C=b.idx_C,
    )


# Example usage
if __name__ == "__main__":
    cycle = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
    mu = stationary(cycle)
    print(f"mu = {mu}")
    print(f"E_A for A={{0,1}}:\n{entrance_kernel(cycle, [0, 1])}")
    print(f"Kac lift of delta_0 on A={{0}}: {kac_lift(cycle, [0], [1.0])}")
