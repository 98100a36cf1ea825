"""
Increment distributions of the random walk.

Each law answers exact tail and moment questions (used by the closed forms)
and samples fast (used by the Monte Carlo engine). Laws are immutable and
may be shared between threads; random streams are not.

Tail convention: tail_low(x) = P(X <= x) keeps the atom at x, and
tail_up(x) = 1 - tail_low(x) = P(X > x).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.stats import norm

from config import MEAN_ZERO_TOL, PMF_SUM_TOL, QUAD_ABS_TOL, QUAD_REL_TOL
from increments.rng import RngState
from utils.errors import CapabilityError, ConfigurationError
from utils.parsing import parse_exact

logger = logging.getLogger(__name__)


class Family(str, Enum):
    LATTICE_PMF = "lattice_pmf"
    LAPLACE_UNIT = "laplace_unit"
    GAUSSIAN_STD = "gaussian_std"
    UNIFORM_SYMMETRIC = "uniform_symmetric"
    UPWARD_EXPONENTIAL_MIX = "upward_exponential_mix"
    PRODUCT_OF_1D = "product_of_1d"


@dataclass(frozen=True)
class Moments:
    """Mean, E|X_1| and E X_1^2 of a one-dimensional law."""

    mean: float
    abs_mean: float
    second_moment: float

    @property
    def c1(self) -> float:
        return 2.0 / self.abs_mean

    @property
    def sigma(self) -> float:
        return math.sqrt(self.second_moment)


class IncrementLaw(ABC):
    """Distribution of X_1 for a walk on a closed subgroup of R^d."""

    family: Family
    dimension: int = 1
    lattice_span: float = 0.0

    def __init__(self, params: Optional[Dict] = None):
        self.params = dict(params or {})

    # ------------------------------------------------------------------ #
    # Sampling
    # ------------------------------------------------------------------ #
    @abstractmethod
    def sample(self, rng: RngState, n: int) -> np.ndarray:
        """n i.i.d. draws as points of R^d (shape (n,) for d=1, (n, d) otherwise)."""

    def sample_units(self, rng: RngState, n: int) -> np.ndarray:
        """Draws in walk units: integer multiples of h on a lattice, raw points otherwise."""
        return self.sample(rng, n)

    @property
    def is_lattice(self) -> bool:
        return self.lattice_span > 0

    def to_points(self, units):
        """Convert walk units back to points of the state space."""
        if self.is_lattice:
            return np.asarray(units, dtype=np.float64) * self.lattice_span
        return units

    def to_units(self, points):
        """Convert points of the state space to walk units."""
        if not self.is_lattice:
            return np.asarray(points, dtype=np.float64)
        scaled = np.asarray(points, dtype=np.float64) / self.lattice_span
        units = np.rint(scaled)
        if not np.allclose(units, scaled, rtol=0, atol=1e-9):
            raise ConfigurationError("point is not on the lattice h*Z", field="start")
        return units.astype(np.int64)

    # ------------------------------------------------------------------ #
    # Tails (one-dimensional primitives; products override)
    # ------------------------------------------------------------------ #
    @abstractmethod
    def tail_low(self, x):
        """P(X_1 <= x); coordinate-wise for d >= 2."""

    def tail_up(self, x):
        """P(X_1 > x) for d = 1, 1 - P(X_1 <= x) for d >= 2."""
        return 1.0 - self.tail_low(x)

    def prob_below(self, x):
        """P(X_1 < x); equals tail_low for atomless laws."""
        return self.tail_low(x)

    def point_mass(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def interval_prob(self, lo, hi, closed_low: bool = True, closed_high: bool = True):
        """P(X_1 in the interval between lo and hi) with the requested closedness."""
        upper = self.tail_low(hi) if closed_high else self.prob_below(hi)
        lower = self.prob_below(lo) if closed_low else self.tail_low(lo)
        return np.clip(np.asarray(upper) - np.asarray(lower), 0.0, 1.0)

    def support_bounds(self) -> Tuple[float, float]:
        """(essinf X_1, esssup X_1), possibly infinite."""
        return -math.inf, math.inf

    # ------------------------------------------------------------------ #
    # Moments and integrated tails
    # ------------------------------------------------------------------ #
    @abstractmethod
    def moments(self) -> Moments:
        """Exact mean, E|X_1| and sigma^2."""

    @property
    def has_finite_variance(self) -> bool:
        return True

    def integrated_tail_up(self, x):
        """Integral of P(X_1 > y) over y in [0, x] for x >= 0."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.array([
            integrate.quad(lambda y: float(self.tail_up(y)), 0.0, xi,
                           epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, limit=200)[0]
            for xi in x
        ])
        return out

    def integrated_tail_low(self, x):
        """Integral of P(X_1 <= y) over y in [x, 0] for x <= 0."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.array([
            integrate.quad(lambda y: float(self.tail_low(y)), xi, 0.0,
                           epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, limit=200)[0]
            for xi in x
        ])
        return out

    def positive_part_mean(self) -> float:
        """E X_1^+ = integral of P(X_1 > y) over [0, inf)."""
        return self.moments().abs_mean / 2.0 + self.moments().mean / 2.0

    def negative_part_mean(self) -> float:
        """E X_1^- = integral of P(X_1 <= y) over (-inf, 0)."""
        return self.moments().abs_mean / 2.0 - self.moments().mean / 2.0

    @property
    def is_mean_zero(self) -> bool:
        return abs(self.moments().mean) <= MEAN_ZERO_TOL

    # ------------------------------------------------------------------ #
    # Special classes used by closed-form targets
    # ------------------------------------------------------------------ #
    @property
    def upward_exponential(self) -> Optional[Tuple[float, float]]:
        """(P(X_1 > 0), rate) if P(X_1 > . | X_1 > 0) is exponential, else None."""
        return None

    @property
    def upward_skip_free(self) -> bool:
        """True if X_1 takes values in {h, 0, -h, -2h, ...} only."""
        return False

    def describe(self) -> Dict:
        return {"family": self.family.value, "params": self.params}

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"


# ---------------------------------------------------------------------- #
# Lattice laws
# ---------------------------------------------------------------------- #
class LatticeLaw(IncrementLaw):
    """Finitely supported pmf on h*Z, with exact rational bookkeeping."""

    family = Family.LATTICE_PMF

    def __init__(self, pmf: Sequence[Tuple], params: Optional[Dict] = None):
        super().__init__(params or {"pmf": [[str(s), str(w)] for s, w in pmf]})
        exact = {}
        for support, weight in pmf:
            s, w = parse_exact(support), parse_exact(weight)
            if w < 0:
                raise ConfigurationError(f"negative weight {weight} at {support}", field="params.pmf")
            if w > 0:
                exact[s] = exact.get(s, Fraction(0)) + w
        if not exact:
            raise ConfigurationError("pmf has no positive weights", field="params.pmf")
        total = sum(exact.values())
        if abs(total - 1) > PMF_SUM_TOL:
            raise ConfigurationError(f"weights sum to {float(total)}, not 1", field="params.pmf")
        if set(exact) == {Fraction(0)}:
            raise ConfigurationError("degenerate law concentrated at 0", field="params.pmf")

        support = sorted(exact)
        self._exact_support: List[Fraction] = support
        self._exact_weights: List[Fraction] = [exact[s] / total for s in support]
        span = _lattice_gcd([s for s in support if s != 0])
        self._span_exact = span
        self.lattice_span = float(span)
        self._units = np.array([int(s / span) for s in support], dtype=np.int64)
        self._points = self._units.astype(np.float64) * self.lattice_span
        self._weights = np.array([float(w) for w in self._exact_weights])
        cumulative = np.cumsum(self._exact_weights)
        self._cdf = np.array([float(c) for c in cumulative])
        self._cdf[-1] = 1.0
        self._sf = np.array([float(1 - c) for c in cumulative])

        if self.params.get("mean_zero") and self._exact_mean() != 0:
            raise ConfigurationError(
                f"declared mean-zero but mean is {float(self._exact_mean())}", field="params.pmf"
            )

    def _exact_mean(self) -> Fraction:
        return sum(s * w for s, w in zip(self._exact_support, self._exact_weights))

    def sample_units(self, rng: RngState, n: int) -> np.ndarray:
        u = rng.uniform(n)
        idx = np.searchsorted(self._cdf, u, side="right")
        np.minimum(idx, len(self._units) - 1, out=idx)
        return self._units[idx]

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        return self.sample_units(rng, n).astype(np.float64) * self.lattice_span

    def tail_low(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self._points, x, side="right")
        table = np.concatenate(([0.0], self._cdf))
        return table[idx]

    def tail_up(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self._points, x, side="right")
        table = np.concatenate(([1.0], self._sf))
        return table[idx]

    def prob_below(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self._points, x, side="left")
        table = np.concatenate(([0.0], self._cdf))
        return table[idx]

    def point_mass(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self._points, x, side="left")
        idx_c = np.minimum(idx, len(self._points) - 1)
        hit = (idx < len(self._points)) & (self._points[idx_c] == x)
        return np.where(hit, self._weights[idx_c], 0.0)

    def support_bounds(self) -> Tuple[float, float]:
        return float(self._points[0]), float(self._points[-1])

    def moments(self) -> Moments:
        mean = self._exact_mean()
        abs_mean = sum(abs(s) * w for s, w in zip(self._exact_support, self._exact_weights))
        second = sum(s * s * w for s, w in zip(self._exact_support, self._exact_weights))
        return Moments(float(mean), float(abs_mean), float(second))

    @property
    def is_mean_zero(self) -> bool:
        return self._exact_mean() == 0

    def positive_part_mean(self) -> float:
        return float(sum(s * w for s, w in zip(self._exact_support, self._exact_weights) if s > 0))

    def negative_part_mean(self) -> float:
        return float(sum(-s * w for s, w in zip(self._exact_support, self._exact_weights) if s < 0))

    def integrated_tail_up(self, x):
        # P(X > y) is constant on [kh, (k+1)h)
        h = self.lattice_span
        top = max(int(self._units[-1]), 0)
        x = np.minimum(np.atleast_1d(np.asarray(x, dtype=np.float64)), (top + 1) * h)
        full = np.floor(x / h).astype(np.int64)
        ks = np.arange(0, top + 1)
        steps = self.tail_up(ks * h) * h
        prefix = np.concatenate(([0.0], np.cumsum(steps)))
        full_c = np.clip(full, 0, top + 1)
        partial = np.where(full <= top, (x - full * h) * self.tail_up(full * h), 0.0)
        return prefix[full_c] + partial

    def integrated_tail_low(self, x):
        # P(X <= y) is constant on [-(k+1)h, -kh)
        h = self.lattice_span
        bottom = max(-int(self._units[0]), 0)
        x = np.maximum(np.atleast_1d(np.asarray(x, dtype=np.float64)), -(bottom + 1) * h)
        full = np.floor(-x / h).astype(np.int64)
        ks = np.arange(0, bottom + 1)
        steps = self.tail_low(-(ks + 1) * h) * h
        prefix = np.concatenate(([0.0], np.cumsum(steps)))
        full_c = np.clip(full, 0, bottom + 1)
        partial = np.where(full <= bottom, (-x - full * h) * self.tail_low(-(full + 1) * h), 0.0)
        return prefix[full_c] + partial

    @property
    def upward_skip_free(self) -> bool:
        return int(self._units[-1]) == 1

    @property
    def support(self) -> np.ndarray:
        return self._points.copy()

    @property
    def weights(self) -> np.ndarray:
        return self._weights.copy()


def _lattice_gcd(values: Sequence[Fraction]) -> Fraction:
    """Largest h > 0 with every value in h*Z."""
    denominator = math.lcm(*[v.denominator for v in values])
    g = 0
    for v in values:
        g = math.gcd(g, abs(int(v * denominator)))
    return Fraction(g, denominator)


# ---------------------------------------------------------------------- #
# Continuum laws
# ---------------------------------------------------------------------- #
class UpwardExponentialLaw(IncrementLaw):
    """+Exp(rate_up) with probability p_up, -Exp(rate_down) otherwise.

    rate_down is fixed by the mean-zero constraint p_up/rate_up = (1-p_up)/rate_down.
    """

    family = Family.UPWARD_EXPONENTIAL_MIX

    def __init__(self, p_up: float = 0.5, rate_up: float = 1.0, params: Optional[Dict] = None):
        super().__init__(params or {"p_up": p_up, "rate_up": rate_up})
        if not 0 < p_up < 1:
            raise ConfigurationError("p_up must lie in (0, 1)", field="params.p_up")
        if rate_up <= 0:
            raise ConfigurationError("rate_up must be positive", field="params.rate_up")
        self.p_up = float(p_up)
        self.rate_up = float(rate_up)
        self.rate_down = (1.0 - self.p_up) * self.rate_up / self.p_up

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        up = rng.uniform(n) < self.p_up
        magnitude = rng.generator.standard_exponential(n)
        return np.where(up, magnitude / self.rate_up, -magnitude / self.rate_down)

    def tail_low(self, x):
        x = np.asarray(x, dtype=np.float64)
        neg = (1.0 - self.p_up) * np.exp(self.rate_down * np.minimum(x, 0.0))
        pos = 1.0 - self.p_up * np.exp(-self.rate_up * np.maximum(x, 0.0))
        return np.where(x < 0, neg, pos)

    def tail_up(self, x):
        x = np.asarray(x, dtype=np.float64)
        neg = 1.0 - (1.0 - self.p_up) * np.exp(self.rate_down * np.minimum(x, 0.0))
        pos = self.p_up * np.exp(-self.rate_up * np.maximum(x, 0.0))
        return np.where(x < 0, neg, pos)

    def moments(self) -> Moments:
        p, q = self.p_up, 1.0 - self.p_up
        return Moments(
            mean=0.0,
            abs_mean=p / self.rate_up + q / self.rate_down,
            second_moment=2.0 * p / self.rate_up ** 2 + 2.0 * q / self.rate_down ** 2,
        )

    def integrated_tail_up(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return self.p_up / self.rate_up * -np.expm1(-self.rate_up * x)

    def integrated_tail_low(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return (1.0 - self.p_up) / self.rate_down * -np.expm1(self.rate_down * x)

    @property
    def upward_exponential(self) -> Optional[Tuple[float, float]]:
        return self.p_up, self.rate_up


class LaplaceLaw(UpwardExponentialLaw):
    """Two-sided Laplace law with density exp(-|x|/b)/(2b)."""

    family = Family.LAPLACE_UNIT

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ConfigurationError("scale must be positive", field="params.scale")
        super().__init__(0.5, 1.0 / scale, params={"scale": scale})
        self.scale = float(scale)

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        return self.scale * rng.generator.laplace(0.0, 1.0, n)

    def moments(self) -> Moments:
        b = self.scale
        return Moments(mean=0.0, abs_mean=b, second_moment=2.0 * b * b)


class GaussianLaw(IncrementLaw):
    family = Family.GAUSSIAN_STD

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ConfigurationError("scale must be positive", field="params.scale")
        super().__init__({"scale": scale})
        self.scale = float(scale)

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        return self.scale * rng.generator.standard_normal(n)

    def tail_low(self, x):
        return norm.cdf(np.asarray(x, dtype=np.float64) / self.scale)

    def tail_up(self, x):
        return norm.sf(np.asarray(x, dtype=np.float64) / self.scale)

    def moments(self) -> Moments:
        s = self.scale
        return Moments(mean=0.0, abs_mean=s * math.sqrt(2.0 / math.pi), second_moment=s * s)

    def integrated_tail_up(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        s = self.scale
        with np.errstate(invalid="ignore"):
            tail = np.where(np.isinf(x), 0.0, x * norm.sf(x / s))
        return tail + s * (norm.pdf(0.0) - norm.pdf(x / s))

    def integrated_tail_low(self, x):
        return self.integrated_tail_up(-np.asarray(x, dtype=np.float64))


class UniformLaw(IncrementLaw):
    family = Family.UNIFORM_SYMMETRIC

    def __init__(self, half_width: float = 1.0):
        if half_width <= 0:
            raise ConfigurationError("half_width must be positive", field="params.half_width")
        super().__init__({"half_width": half_width})
        self.half_width = float(half_width)

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        a = self.half_width
        return rng.generator.uniform(-a, a, n)

    def tail_low(self, x):
        a = self.half_width
        return np.clip((np.asarray(x, dtype=np.float64) + a) / (2.0 * a), 0.0, 1.0)

    def support_bounds(self) -> Tuple[float, float]:
        return -self.half_width, self.half_width

    def moments(self) -> Moments:
        a = self.half_width
        return Moments(mean=0.0, abs_mean=a / 2.0, second_moment=a * a / 3.0)

    def integrated_tail_up(self, x):
        a = self.half_width
        m = np.minimum(np.atleast_1d(np.asarray(x, dtype=np.float64)), a)
        return (a * m - m * m / 2.0) / (2.0 * a)

    def integrated_tail_low(self, x):
        return self.integrated_tail_up(-np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------- #
# Products
# ---------------------------------------------------------------------- #
class ProductLaw(IncrementLaw):
    """Independent coordinates, each a one-dimensional law."""

    family = Family.PRODUCT_OF_1D

    def __init__(self, components: Sequence[IncrementLaw], params: Optional[Dict] = None):
        if len(components) < 2:
            raise ConfigurationError("a product law needs at least two components",
                                     field="params.components")
        if any(c.dimension != 1 for c in components):
            raise ConfigurationError("components must be one-dimensional", field="params.components")
        spans = {c.lattice_span for c in components}
        if len(spans) != 1:
            raise ConfigurationError("components must share one lattice span (or all be continuum)",
                                     field="params.components")
        super().__init__(params or {"components": [c.describe() for c in components]})
        self.components = list(components)
        self.dimension = len(components)
        self.lattice_span = spans.pop()

    def sample_units(self, rng: RngState, n: int) -> np.ndarray:
        return np.column_stack([c.sample_units(rng, n) for c in self.components])

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        return np.column_stack([c.sample(rng, n) for c in self.components])

    def _coordinates(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dimension:
            raise ConfigurationError(f"point of dimension {x.shape[-1]} for a {self.dimension}-d law")
        return [x[..., i] for i in range(self.dimension)]

    def tail_low(self, x):
        out = 1.0
        for law, xi in zip(self.components, self._coordinates(x)):
            out = out * law.tail_low(xi)
        return out

    def prob_below(self, x):
        out = 1.0
        for law, xi in zip(self.components, self._coordinates(x)):
            out = out * law.prob_below(xi)
        return out

    def prob_all_above(self, x):
        """P(X_1 > x) coordinate-wise."""
        out = 1.0
        for law, xi in zip(self.components, self._coordinates(x)):
            out = out * law.tail_up(xi)
        return out

    def prob_all_at_least(self, x):
        out = 1.0
        for law, xi in zip(self.components, self._coordinates(x)):
            out = out * (1.0 - law.prob_below(xi))
        return out

    def point_mass(self, x):
        out = 1.0
        for law, xi in zip(self.components, self._coordinates(x)):
            out = out * law.point_mass(xi)
        return out

    def moments(self) -> Moments:
        raise CapabilityError("moments are defined for one-dimensional walks only")

    @property
    def is_mean_zero(self) -> bool:
        return all(c.is_mean_zero for c in self.components)


# ---------------------------------------------------------------------- #
# Factory
# ---------------------------------------------------------------------- #
def law_from_spec(spec: Dict) -> IncrementLaw:
    """
    Build a law from its configuration entry.

    Args:
        spec: {"family": "...", "params": {...}}; lattice pmfs are given as
            {"pmf": [[support, weight], ...]} with decimal strings parsed exactly.

    Returns:
        The immutable law
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigurationError("law must be an object with a 'family' key", field="law")
    try:
        family = Family(spec["family"])
    except ValueError:
        raise ConfigurationError(f"unsupported family {spec['family']!r}", field="law.family")
    params = dict(spec.get("params") or {})

    try:
        if family is Family.LATTICE_PMF:
            if "pmf" not in params:
                raise ConfigurationError("lattice_pmf needs params.pmf", field="law.params.pmf")
            return LatticeLaw(params["pmf"], params=params)
        if family is Family.LAPLACE_UNIT:
            return LaplaceLaw(**params)
        if family is Family.GAUSSIAN_STD:
            return GaussianLaw(**params)
        if family is Family.UNIFORM_SYMMETRIC:
            return UniformLaw(**params)
        if family is Family.UPWARD_EXPONENTIAL_MIX:
            return UpwardExponentialLaw(**params)
        if family is Family.PRODUCT_OF_1D:
            components = [law_from_spec(c) for c in params.get("components", [])]
            return ProductLaw(components, params=params)
    except TypeError as e:
        raise ConfigurationError(f"bad parameters for {family.value}: {e}", field="law.params")
    raise ConfigurationError(f"unsupported family {family.value!r}", field="law.family")


def simple_walk() -> LatticeLaw:
    """Steps +1 and -1 with probability 1/2 each."""
    return LatticeLaw([("1", "1/2"), ("-1", "1/2")])


# Example usage
if __name__ == "__main__":
    law = law_from_spec({"family": "lattice_pmf", "params": {"pmf": [["1", "2/3"], ["-2", "1/3"]]}})
    print(f"Law: {law}, span h = {law.lattice_span}")
    print(f"Moments: {law.moments()}")
    print(f"P(X <= -1) = {law.tail_low(-1.0)}")
    print(f"Samples: {law.sample(RngState(1), 5)}")
