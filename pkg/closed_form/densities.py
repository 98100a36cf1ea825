"""
Closed-form invariant densities of random-walk crossing chains.

Every density is taken with respect to the normalized Haar measure lambda of
the walk's state space: each lattice point carries mass h, and lambda is
Lebesgue measure on the continuum.

Pointwise values come from exact hit probabilities P(x +/- X_1 in S). For
one-dimensional continuum laws the same densities are also kept as a sum of
shifted tail terms, which integrate in closed form through the law's
integrated tails; lattice densities are tabulated on their (finite) support.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate

from config import BISECTION_TOL, MOMENT_REL_TOL, QUAD_ABS_TOL, QUAD_REL_TOL
from increments.laws import IncrementLaw, ProductLaw
from increments.rng import RngState
from walks.sets import SetKind, SetSpec
from utils.errors import CapabilityError, ConfigurationError, ConsistencyError

logger = logging.getLogger(__name__)

_HALF_LINES = (SetKind.HALF_LINE_NONNEG, SetKind.HALF_LINE_NEG)
_ORTHANTS = (SetKind.ORTHANT_NONNEG, SetKind.ORTHANT_NEG)


# ---------------------------------------------------------------------- #
# Hit probabilities P(x + sign*X_1 in S), S a non-negated set
# ---------------------------------------------------------------------- #
def _hit_probability_1d(law: IncrementLaw, S: SetSpec, x, sign: int):
    x = np.asarray(x, dtype=np.float64)
    kind = S.kind
    if kind in (SetKind.HALF_LINE_NONNEG, SetKind.ORTHANT_NONNEG):
        return 1.0 - law.prob_below(-x) if sign > 0 else law.tail_low(x)
    if kind in (SetKind.HALF_LINE_NEG, SetKind.ORTHANT_NEG):
        return law.prob_below(-x) if sign > 0 else law.tail_up(x)
    if kind is SetKind.BOX:
        a, b = S.lower[0], S.upper[0]
        if sign > 0:
            return law.interval_prob(a - x, b - x, True, True)
        return law.interval_prob(x - b, x - a, True, True)
    if kind is SetKind.HALF_OPEN_INTERVAL:
        a, b = S.lower[0], S.upper[0]
        if sign > 0:
            return law.interval_prob(a - x, b - x, True, False)
        return law.interval_prob(x - b, x - a, False, True)
    # lattice mask
    total = np.zeros_like(x)
    for m in S.points:
        total = total + law.point_mass(sign * (m[0] - x))
    return total


def _coordinate_laws(law: IncrementLaw) -> List[IncrementLaw]:
    return list(law.components) if isinstance(law, ProductLaw) else [law]


def hit_probability(law: IncrementLaw, S: SetSpec, x, sign: int):
    """P(x + sign*X_1 in S) for a non-negated set S, exact for lattice laws."""
    if S.negated:
        raise ConfigurationError("hit probabilities take the base set, not its complement")
    if S.kind is SetKind.CUSTOM_LATTICE_MASK and not law.is_lattice:
        raise CapabilityError("lattice masks carry no lambda-mass for a continuum law")
    if law.dimension == 1:
        if S.dimension != 1:
            raise ConfigurationError(f"{S.dimension}-d set for a one-dimensional law", field="set")
        return _hit_probability_1d(law, S, x, sign)

    x = np.asarray(x, dtype=np.float64)
    if S.dimension != law.dimension:
        raise ConfigurationError(f"{S.dimension}-d set for a {law.dimension}-d law", field="set")
    comps = _coordinate_laws(law)
    coords = [x[..., i] for i in range(law.dimension)]
    if S.kind in _HALF_LINES or S.kind is SetKind.HALF_OPEN_INTERVAL:
        raise ConfigurationError(f"{S.kind.value} is a one-dimensional set", field="set.kind")
    if S.kind is SetKind.CUSTOM_LATTICE_MASK:
        total = np.zeros(x.shape[:-1])
        for m in S.points:
            term = 1.0
            for comp, xi, mi in zip(comps, coords, m):
                term = term * comp.point_mass(sign * (mi - xi))
            total = total + term
        return total
    out = 1.0
    for i, (comp, xi) in enumerate(zip(comps, coords)):
        if S.kind is SetKind.BOX:
            side = SetSpec.box([S.lower[i]], [S.upper[i]])
        else:
            side = SetSpec(S.kind)
        out = out * _hit_probability_1d(comp, side, xi, sign)
    return out


def _base(S: SetSpec) -> SetSpec:
    return S.complement() if S.negated else S


def entrance_probability(law: IncrementLaw, A: SetSpec, x):
    """P(X_1 in x - A^c), the entrance weight of x (not restricted to A)."""
    if A.negated:
        return hit_probability(law, _base(A), x, -1)
    return 1.0 - hit_probability(law, A, x, -1)


def exit_probability(law: IncrementLaw, A: SetSpec, x):
    """P(x + X_1 in A), the exit weight of x (not restricted to A^c)."""
    if A.negated:
        return 1.0 - hit_probability(law, _base(A), x, +1)
    return hit_probability(law, A, x, +1)


# ---------------------------------------------------------------------- #
# Tail-term representation of one-dimensional continuum densities
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class TailTerm:
    """beta * K(sign*x + shift) with K = P(X_1 <= .) ("F") or P(X_1 > .) ("S")."""

    beta: float
    kind: str
    sign: int
    shift: float


@dataclass(frozen=True)
class Piece:
    """Density const + sum of tail terms on the interval [lo, hi)."""

    lo: float
    hi: float
    const: float
    terms: Tuple[TailTerm, ...]

    def scaled(self, k: float) -> "Piece":
        return Piece(self.lo, self.hi, self.const * k,
                     tuple(replace(t, beta=t.beta * k) for t in self.terms))


def _make_piece(lo: float, hi: float, const: float, f_terms: Sequence[Tuple[float, int, float]]) -> Piece:
    """
    Build a piece from an F-only form. Terms whose argument tends to +inf on
    an infinite end of [lo, hi) are rewritten with the survival function so
    every term integral stays finite.
    """
    terms = []
    for beta, sign, shift in f_terms:
        goes_up = (sign > 0 and hi == math.inf) or (sign < 0 and lo == -math.inf)
        if goes_up:
            const += beta
            terms.append(TailTerm(-beta, "S", sign, shift))
        else:
            terms.append(TailTerm(beta, "F", sign, shift))
    if abs(const) < 1e-15:
        const = 0.0
    return Piece(lo, hi, const, tuple(terms))


def _core_terms(S: SetSpec, sign: int) -> Tuple[float, List[Tuple[float, int, float]]]:
    """P(x + sign*X_1 in S) for an atomless law as const + sum beta*F(s*x + c)."""
    kind = S.kind
    if kind in (SetKind.HALF_LINE_NONNEG, SetKind.ORTHANT_NONNEG):
        return (1.0, [(-1.0, -1, 0.0)]) if sign > 0 else (0.0, [(1.0, 1, 0.0)])
    if kind in (SetKind.HALF_LINE_NEG, SetKind.ORTHANT_NEG):
        return (0.0, [(1.0, -1, 0.0)]) if sign > 0 else (1.0, [(-1.0, 1, 0.0)])
    if kind in (SetKind.BOX, SetKind.HALF_OPEN_INTERVAL):
        a, b = S.lower[0], S.upper[0]
        if sign > 0:
            return 0.0, [(1.0, -1, b), (-1.0, -1, a)]
        return 0.0, [(1.0, 1, -a), (-1.0, 1, -b)]
    raise CapabilityError("lattice masks carry no lambda-mass for a continuum law")


def _intervals(S: SetSpec) -> List[Tuple[float, float]]:
    """A one-dimensional set as disjoint intervals (endpoints up to null sets)."""
    base = _base(S)
    kind = base.kind
    if kind is SetKind.CUSTOM_LATTICE_MASK:
        raise CapabilityError("lattice masks carry no lambda-mass for a continuum law")
    if kind in (SetKind.HALF_LINE_NONNEG, SetKind.ORTHANT_NONNEG):
        parts = [(0.0, math.inf)]
        other = [(-math.inf, 0.0)]
    elif kind in (SetKind.HALF_LINE_NEG, SetKind.ORTHANT_NEG):
        parts = [(-math.inf, 0.0)]
        other = [(0.0, math.inf)]
    else:
        a, b = base.lower[0], base.upper[0]
        parts = [(a, b)]
        other = [(-math.inf, a), (b, math.inf)]
    return other if S.negated else parts


def _entrance_pieces(A: SetSpec) -> List[Piece]:
    if A.negated:
        const, terms = _core_terms(_base(A), -1)
    else:
        const, terms = _core_terms(A, -1)
        const, terms = 1.0 - const, [(-b, s, c) for b, s, c in terms]
    return [_make_piece(lo, hi, const, terms) for lo, hi in _intervals(A)]


def _exit_pieces(A: SetSpec) -> List[Piece]:
    if A.negated:
        const, terms = _core_terms(_base(A), +1)
        const, terms = 1.0 - const, [(-b, s, c) for b, s, c in terms]
    else:
        const, terms = _core_terms(A, +1)
    return [_make_piece(lo, hi, const, terms) for lo, hi in _intervals(A.complement())]


class _TailAntiderivatives:
    """G(y) = integral of P(X_1 <= t) over (-inf, y]; H(y) = integral of P(X_1 > t) over [y, inf)."""

    def __init__(self, law: IncrementLaw):
        self.law = law
        self.neg_mean = law.negative_part_mean()
        self.pos_mean = law.positive_part_mean()

    def G(self, y):
        y = np.asarray(y, dtype=np.float64)
        finite = np.where(np.isfinite(y), y, 0.0)
        low = self.law.integrated_tail_low(np.minimum(finite, 0.0)).reshape(y.shape)
        up = self.law.integrated_tail_up(np.maximum(finite, 0.0)).reshape(y.shape)
        out = np.where(finite < 0, self.neg_mean - low, self.neg_mean + finite - up)
        out = np.where(y == -np.inf, 0.0, out)
        return np.where(y == np.inf, np.inf, out)

    def H(self, y):
        y = np.asarray(y, dtype=np.float64)
        finite = np.where(np.isfinite(y), y, 0.0)
        low = self.law.integrated_tail_low(np.minimum(finite, 0.0)).reshape(y.shape)
        up = self.law.integrated_tail_up(np.maximum(finite, 0.0)).reshape(y.shape)
        out = np.where(finite >= 0, self.pos_mean - up, self.pos_mean - finite - low)
        out = np.where(y == np.inf, 0.0, out)
        return np.where(y == -np.inf, np.inf, out)

    def term_integral(self, term: TailTerm, a, b):
        c, s = term.shift, term.sign
        if term.kind == "F":
            if s > 0:
                return self.G(b + c) - self.G(a + c)
            return self.G(c - a) - self.G(c - b)
        if s > 0:
            return self.H(a + c) - self.H(b + c)
        return self.H(c - b) - self.H(c - a)

    def piece_integral(self, piece: Piece, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))
        a = np.maximum(u, piece.lo)
        b = np.minimum(v, piece.hi)
        empty = b <= a
        a = np.where(empty, 0.0, a)
        b = np.where(empty, 0.0, b)
        with np.errstate(invalid="ignore"):
            total = np.zeros_like(a) if piece.const == 0 else piece.const * (b - a)
            for term in piece.terms:
                total = total + term.beta * self.term_integral(term, a, b)
        return np.where(empty, 0.0, total)


# ---------------------------------------------------------------------- #
# DensityOnGroup
# ---------------------------------------------------------------------- #
@dataclass
class DensityOnGroup:
    """
    A measure given by a density w.r.t. the normalized Haar measure.

    One-dimensional densities integrate exactly (lattice table or closed-form
    tail terms); higher-dimensional ones are evaluated pointwise and
    integrated over bounded boxes.
    """

    name: str
    law: IncrementLaw
    fn: Callable = field(repr=False)
    total_mass: float = math.inf
    window: Tuple[float, float] = (-math.inf, math.inf)
    pieces: Optional[List[Piece]] = field(default=None, repr=False)
    breakpoints: Tuple[float, ...] = ()
    _table: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.law.dimension

    @property
    def lattice_span(self) -> float:
        return self.law.lattice_span

    @property
    def is_lattice(self) -> bool:
        return self.law.is_lattice

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.total_mass)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=np.float64))

    # -- lattice tables ------------------------------------------------- #
    @property
    def table(self) -> Tuple[np.ndarray, np.ndarray]:
        """Support points and their lambda-masses h*f(x) (one-dimensional lattice)."""
        if self._table is None:
            raise CapabilityError(f"{self.name} has no lattice table")
        return self._table

    def weights(self) -> Dict[float, float]:
        points, masses = self.table
        return {float(p): float(m) for p, m in zip(points, masses)}

    # -- integration ------------------------------------------------------ #
    def integrate(self, lo=-math.inf, hi=math.inf):
        """lambda-mass of [lo, hi] (one-dimensional); hi may be an array."""
        self._require_1d("integrate")
        if self.is_lattice:
            points, masses = self.table
            cum = np.concatenate(([0.0], np.cumsum(masses)))
            upper = cum[np.searchsorted(points, hi, side="right")]
            lower = cum[np.searchsorted(points, lo, side="left")]
            return upper - lower
        if self.pieces is None:
            raise CapabilityError(f"{self.name} has no closed-form integral")
        tails = _TailAntiderivatives(self.law)
        return sum(tails.piece_integral(p, lo, hi) for p in self.pieces)

    def quad_integrate(self, g: Optional[Callable] = None, lo=-math.inf, hi=math.inf) -> float:
        """
        Integral of g*f over [lo, hi] by direct summation (lattice) or
        adaptive quadrature split at the density's break points (continuum).
        """
        self._require_1d("quad_integrate")
        g = g or (lambda y: np.ones_like(np.asarray(y, dtype=np.float64)))
        lo, hi = max(lo, self.window[0]), min(hi, self.window[1])
        if hi < lo:
            return 0.0
        if self.is_lattice:
            h = self.lattice_span
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise CapabilityError(f"{self.name} has unbounded lattice support")
            ks = np.arange(math.ceil(lo / h - 1e-9), math.floor(hi / h + 1e-9) + 1)
            pts = ks * h
            return math.fsum(h * self(pts) * g(pts))
        integrand = lambda y: float(self(y) * g(y))
        return quad_piecewise(integrand, lo, hi, self.breakpoints)

    def cdf(self, x):
        """Normalized distribution function F(x) = mass((-inf, x]) / total_mass."""
        if not self.is_finite:
            raise CapabilityError(f"{self.name} has infinite mass; no distribution function")
        return np.clip(np.asarray(self.integrate(-math.inf, x)) / self.total_mass, 0.0, 1.0)

    def mass(self, B: SetSpec) -> float:
        """lambda-integral of the density over B."""
        if B.dimension != self.dimension:
            raise ConfigurationError(f"{B.dimension}-d set for a {self.dimension}-d density", field="set")
        if self.dimension == 1:
            if self.is_lattice:
                points, masses = self.table
                return math.fsum(masses[B.contains(points)])
            if B.kind is SetKind.CUSTOM_LATTICE_MASK and not B.negated:
                return 0.0
            return math.fsum(float(self.integrate(lo, hi)) for lo, hi in _intervals(B))
        return _mass_nd(self, B)

    def to_frame(self, grid) -> pd.DataFrame:
        grid = np.asarray(grid, dtype=np.float64)
        return pd.DataFrame({"x": grid, "density": self(grid)})

    def describe(self) -> Dict:
        return {"name": self.name, "law": self.law.describe(), "total_mass": self.total_mass,
                "lattice_span": self.lattice_span}

    def _require_1d(self, what: str):
        if self.dimension != 1:
            raise CapabilityError(f"{what} is implemented for one-dimensional densities")


def quad_piecewise(f: Callable[[float], float], lo: float, hi: float, breakpoints=()) -> float:
    """scipy quad on [lo, hi], split at the break points lying inside."""
    cuts = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    total = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        value, _ = integrate.quad(f, a, b, epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, limit=400)
        total.append(value)
    return math.fsum(total)


def _box_grid(B: SetSpec, h: float) -> np.ndarray:
    axes = [np.arange(math.ceil(lo / h - 1e-9), math.floor(hi / h + 1e-9) + 1) * h
            for lo, hi in zip(B.lower, B.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _mass_nd(density: DensityOnGroup, B: SetSpec) -> float:
    if B.negated or not B.is_bounded:
        raise CapabilityError("masses in dimension >= 2 are computed over bounded sets")
    d, h = density.dimension, density.lattice_span
    if B.kind is SetKind.CUSTOM_LATTICE_MASK:
        if not density.is_lattice:
            return 0.0
        pts = np.unique(np.round(np.array(B.points) / h), axis=0) * h
        return math.fsum(density(pts) * h ** d)
    if density.is_lattice:
        grid = _box_grid(B, h)
        return math.fsum(density(grid) * h ** d) if len(grid) else 0.0
    value, _ = integrate.nquad(lambda *xs: float(density(np.array(xs))),
                               list(zip(B.lower, B.upper)),
                               opts={"epsabs": QUAD_ABS_TOL, "epsrel": 1e-8})
    return value


# ---------------------------------------------------------------------- #
# Construction helpers
# ---------------------------------------------------------------------- #
def _c1(law: IncrementLaw) -> Tuple[float, bool]:
    """(c1, normalizable): c1 = 2/E|X_1| for a mean-zero 1-d law, else 1."""
    if law.dimension == 1 and law.is_mean_zero:
        return law.moments().c1, True
    return 1.0, False


def _hull(S: SetSpec) -> Tuple[float, float]:
    if S.negated:
        base = _base(S)
        if base.kind in (SetKind.HALF_LINE_NONNEG, SetKind.ORTHANT_NONNEG):
            return -math.inf, 0.0
        if base.kind in (SetKind.HALF_LINE_NEG, SetKind.ORTHANT_NEG):
            return 0.0, math.inf
        return -math.inf, math.inf
    if S.kind in (SetKind.HALF_LINE_NONNEG, SetKind.ORTHANT_NONNEG):
        return 0.0, math.inf
    if S.kind in (SetKind.HALF_LINE_NEG, SetKind.ORTHANT_NEG):
        return -math.inf, 0.0
    return S.bounds()


def _entrance_window(law: IncrementLaw, A: SetSpec) -> Tuple[float, float]:
    xmin, xmax = law.support_bounds()
    a_lo, a_hi = _hull(A)
    c_lo, c_hi = _hull(A.complement())
    return max(a_lo, c_lo + xmin), min(a_hi, c_hi + xmax)


def _exit_window(law: IncrementLaw, A: SetSpec) -> Tuple[float, float]:
    xmin, xmax = law.support_bounds()
    a_lo, a_hi = _hull(A)
    c_lo, c_hi = _hull(A.complement())
    return max(c_lo, a_lo - xmax), min(c_hi, a_hi - xmin)


def _lattice_table(fn: Callable, window: Tuple[float, float], h: float):
    lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise CapabilityError("lattice density with unbounded support")
    ks = np.arange(math.ceil(lo / h - 1e-9), math.floor(hi / h + 1e-9) + 1)
    points = ks * h
    masses = h * fn(points)
    keep = masses > 0
    return points[keep], masses[keep]


def _set_breakpoints(law: IncrementLaw, sets: Sequence[SetSpec]) -> Tuple[float, ...]:
    cuts = {0.0}
    xmin, xmax = law.support_bounds()
    for S in sets:
        for v in _hull(_base(S)):
            if math.isfinite(v):
                cuts.add(v)
                for edge in (xmin, xmax):
                    if math.isfinite(edge):
                        cuts.update({v + edge, v - edge})
    for edge in (xmin, xmax):
        if math.isfinite(edge):
            cuts.update({edge, -edge})
    return tuple(sorted(cuts))


def _build_1d(name: str, law: IncrementLaw, fn: Callable, pieces: List[Piece],
              window: Tuple[float, float], sets: Sequence[SetSpec], normalizable: bool) -> DensityOnGroup:
    density = DensityOnGroup(name=name, law=law, fn=fn, window=window,
                             breakpoints=_set_breakpoints(law, sets))
    if law.is_lattice:
        density._table = _lattice_table(fn, window, law.lattice_span)
        mass = math.fsum(density._table[1])
    else:
        density.pieces = pieces
        mass = float(density.integrate())
    density.total_mass = mass if normalizable else math.inf
    logger.debug("built %s with total mass %s", name, density.total_mass)
    return density


def _restricted(fn: Callable, region: SetSpec) -> Callable:
    return lambda x: np.where(region.contains(x), fn(x), 0.0)


# ---------------------------------------------------------------------- #
# Public constructors
# ---------------------------------------------------------------------- #
def lambda_entr_density(law: IncrementLaw, A: SetSpec) -> DensityOnGroup:
    """
    Entrance density x -> P(X_1 in x - A^c) on A.

    Args:
        law: Increment law
        A: Set with nontrivial complement (half-lines, orthants, boxes,
            half-open intervals, lattice masks and their complements)

    Returns:
        DensityOnGroup whose total mass is infinite for orthants in d >= 2
    """
    _check_supported(law, A)
    fn = _restricted(lambda x: entrance_probability(law, A, x), A)
    name = f"lambda_entr[{A.kind.value}{'^c' if A.negated else ''}]"
    if law.dimension == 1:
        pieces = None if law.is_lattice else _entrance_pieces(A)
        return _build_1d(name, law, fn, pieces, _entrance_window(law, A), [A], True)
    return DensityOnGroup(name=name, law=law, fn=fn, total_mass=_mass_nd_total(law, A))


def lambda_exit_density(law: IncrementLaw, A: SetSpec) -> DensityOnGroup:
    """Exit density x -> P(x + X_1 in A) on A^c."""
    _check_supported(law, A)
    fn = _restricted(lambda x: exit_probability(law, A, x), A.complement())
    name = f"lambda_exit[{A.kind.value}{'^c' if A.negated else ''}]"
    if law.dimension == 1:
        pieces = None if law.is_lattice else _exit_pieces(A)
        return _build_1d(name, law, fn, pieces, _exit_window(law, A), [A], True)
    return DensityOnGroup(name=name, law=law, fn=fn, total_mass=_mass_nd_total(law, A))


def _check_supported(law: IncrementLaw, A: SetSpec):
    if A.kind is SetKind.CUSTOM_LATTICE_MASK and not law.is_lattice:
        raise CapabilityError("entrance densities of lattice masks need a lattice law")
    if A.dimension != law.dimension:
        raise ConfigurationError(f"{A.dimension}-d set for a {law.dimension}-d law", field="set")


def _mass_nd_total(law: IncrementLaw, A: SetSpec) -> float:
    # entrance mass into A equals exit mass from A^c; whichever side is bounded is summed
    bounded = A if not A.negated else _base(A)
    if bounded.kind in _ORTHANTS:
        return math.inf
    if not A.negated:
        fn = _restricted(lambda x: entrance_probability(law, A, x), A)
    else:
        fn = _restricted(lambda x: exit_probability(law, A, x), A.complement())
    counted = DensityOnGroup(name="mass", law=law, fn=fn)
    return _mass_nd(counted, bounded)


def pi_plus_density(law: IncrementLaw) -> DensityOnGroup:
    """pi_+ = c1 * (1 - P(X_1 <= x)) on the nonnegative orthant."""
    c1, normalizable = _c1(law)
    if law.dimension == 1:
        A = SetSpec.half_line_nonneg()
        base = lambda_entr_density(law, A)
        pieces = None if base.pieces is None else [p.scaled(c1) for p in base.pieces]
        return _build_1d("pi_plus", law, lambda x: c1 * base(x), pieces, base.window, [A], normalizable)
    A = SetSpec.orthant_nonneg(law.dimension)
    fn = _restricted(lambda x: 1.0 - law.tail_low(x), A)
    return DensityOnGroup(name="pi_plus", law=law, fn=lambda x: c1 * fn(x))


def pi_minus_density(law: IncrementLaw) -> DensityOnGroup:
    """pi_- = c1 * lambda_entr of the negative orthant."""
    c1, normalizable = _c1(law)
    if law.dimension == 1:
        A = SetSpec.half_line_neg()
        base = lambda_entr_density(law, A)
        pieces = None if base.pieces is None else [p.scaled(c1) for p in base.pieces]
        return _build_1d("pi_minus", law, lambda x: c1 * base(x), pieces, base.window, [A], normalizable)
    A = SetSpec.orthant_neg(law.dimension)
    fn = _restricted(lambda x: entrance_probability(law, A, x), A)
    return DensityOnGroup(name="pi_minus", law=law, fn=lambda x: c1 * fn(x))


def pi_density(law: IncrementLaw) -> DensityOnGroup:
    """pi = (c1/2) [P(X_1 > x) on [0, inf), P(X_1 <= x) on (-inf, 0)]."""
    if law.dimension != 1:
        raise CapabilityError("pi is defined for one-dimensional walks")
    c1, normalizable = _c1(law)
    plus = lambda_entr_density(law, SetSpec.half_line_nonneg())
    minus = lambda_entr_density(law, SetSpec.half_line_neg())
    fn = lambda x: 0.5 * c1 * (plus(x) + minus(x))
    pieces = None
    if not law.is_lattice:
        pieces = [p.scaled(0.5 * c1) for p in plus.pieces + minus.pieces]
    window = (minus.window[0], plus.window[1])
    return _build_1d("pi", law, fn, pieces, window, [SetSpec.half_line_nonneg()], normalizable)


# ---------------------------------------------------------------------- #
# First absolute moment of pi
# ---------------------------------------------------------------------- #
def first_moment_check(law: IncrementLaw) -> Dict[str, float]:
    """
    Three routes to the integral of |y| against pi.

    Returns:
        {"moment_formula": sigma^2/(2E|X_1|),
         "integral_forms": (1/2)[int y dpi_+ - int y dpi_-] from the tail integrals,
         "direct": quadrature/summation of |y| against the pi density}
    """
    if law.dimension != 1:
        raise CapabilityError("the first moment of pi is defined for one-dimensional walks")
    if not law.has_finite_variance:
        raise CapabilityError("infinite variance: the first moment of pi is infinite")
    if not law.is_mean_zero:
        raise CapabilityError("pi is a probability only for mean-zero laws")

    m = law.moments()
    c1, h = m.c1, law.lattice_span
    xmin, xmax = law.support_bounds()
    up_points = _lattice_multiples(h, xmax) if law.is_lattice else ()
    down_points = _lattice_multiples(h, -xmin) if law.is_lattice else ()
    up_hi = xmax if math.isfinite(xmax) else math.inf
    down_hi = -xmin if math.isfinite(xmin) else math.inf

    plus_part = quad_piecewise(lambda y: (y - h / 2) * float(law.tail_up(y)), 0.0, up_hi, up_points)
    minus_part = quad_piecewise(lambda y: (y + h / 2) * float(law.prob_below(-y)), 0.0, down_hi, down_points)
    integral_forms = 0.5 * c1 * (plus_part + minus_part)

    direct = pi_density(law).quad_integrate(lambda y: np.abs(y))
    return {
        "moment_formula": m.second_moment / (2.0 * m.abs_mean),
        "integral_forms": integral_forms,
        "direct": direct,
    }


def _lattice_multiples(h: float, top: float) -> Tuple[float, ...]:
    if not (h > 0 and math.isfinite(top)) or top <= 0:
        return ()
    return tuple(k * h for k in range(1, int(round(top / h)) + 1))


def abs_first_moment_pi(law: IncrementLaw) -> float:
    """sigma^2 / (2 E|X_1|), checked against the integral forms and the direct integral."""
    routes = first_moment_check(law)
    target = routes["moment_formula"]
    for name in ("integral_forms", "direct"):
        if abs(routes[name] - target) > MOMENT_REL_TOL * max(abs(target), 1e-300):
            raise ConsistencyError(
                f"first moment of pi: {name} = {routes[name]!r} disagrees with sigma^2/(2E|X|) = {target!r}"
            )
    return target


# ---------------------------------------------------------------------- #
# Sampling
# ---------------------------------------------------------------------- #
def sample_from(density: DensityOnGroup, rng: RngState, n: int) -> np.ndarray:
    """
    n i.i.d. draws from a finite-mass one-dimensional density.

    Lattice densities are sampled exactly by inverse CDF over their table;
    continuum densities by vectorized bisection on the closed-form CDF.
    """
    if not density.is_finite:
        raise CapabilityError(f"{density.name} has infinite mass and cannot be sampled")
    if density.dimension != 1:
        raise CapabilityError("sampling is implemented for one-dimensional densities")
    u = rng.uniform(n)
    if density.is_lattice:
        points, masses = density.table
        cum = np.cumsum(masses)
        idx = np.searchsorted(cum, u * cum[-1], side="right")
        return points[np.minimum(idx, len(points) - 1)]
    return _bisect_cdf(density, u * density.total_mass)


def _bisect_cdf(density: DensityOnGroup, targets: np.ndarray) -> np.ndarray:
    lo_w, hi_w = density.window
    lo = np.full_like(targets, lo_w if math.isfinite(lo_w) else -1.0)
    hi = np.full_like(targets, hi_w if math.isfinite(hi_w) else 1.0)
    if not math.isfinite(lo_w):
        for _ in range(1100):
            low_mass = density.integrate(-math.inf, lo)
            short = low_mass > targets
            if not short.any():
                break
            lo = np.where(short, 2.0 * lo, lo)
    if not math.isfinite(hi_w):
        for _ in range(1100):
            high_mass = density.integrate(-math.inf, hi)
            short = high_mass < targets
            if not short.any():
                break
            hi = np.where(short, 2.0 * hi, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = density.integrate(-math.inf, mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= BISECTION_TOL * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


# Example usage
if __name__ == "__main__":
    from increments.laws import LaplaceLaw, LatticeLaw

    law = LatticeLaw([("1", "2/3"), ("-2", "1/3")])
    print(f"pi weights: {pi_density(law).weights()}")
    print(f"E|Y| under pi: {abs_first_moment_pi(law)}")
    laplace = LaplaceLaw()
    print(f"pi_+ mass (laplace): {pi_plus_density(laplace).total_mass}")
    print(f"draws: {sample_from(pi_plus_density(laplace), RngState(7), 5)}")
