"""
Subsets of the walk's state space.

Membership is total and pure, vectorized over arrays of points (shape (n,)
in dimension one, (n, d) otherwise), and every set has a complement.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from utils.errors import ConfigurationError

_MASK_ATOL = 1e-9


class SetKind(str, Enum):
    HALF_LINE_NONNEG = "half_line_nonneg"
    HALF_LINE_NEG = "half_line_neg"
    ORTHANT_NONNEG = "orthant_nonneg"
    ORTHANT_NEG = "orthant_neg"
    BOX = "box"
    HALF_OPEN_INTERVAL = "half_open_interval"
    CUSTOM_LATTICE_MASK = "custom_lattice_mask"


@dataclass(frozen=True)
class SetSpec:
    """A set A (or its complement when negated=True)."""

    kind: SetKind
    dimension: int = 1
    lower: Optional[Tuple[float, ...]] = None
    upper: Optional[Tuple[float, ...]] = None
    points: Optional[Tuple[Tuple[float, ...], ...]] = None
    negated: bool = False
    _mask_array: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    # ------------------------------------------------------------------ #
    # Constructors
    # ------------------------------------------------------------------ #
    @classmethod
    def half_line_nonneg(cls) -> "SetSpec":
        return cls(SetKind.HALF_LINE_NONNEG)

    @classmethod
    def half_line_neg(cls) -> "SetSpec":
        return cls(SetKind.HALF_LINE_NEG)

    @classmethod
    def orthant_nonneg(cls, dimension: int) -> "SetSpec":
        return cls(SetKind.ORTHANT_NONNEG, dimension=dimension)

    @classmethod
    def orthant_neg(cls, dimension: int) -> "SetSpec":
        return cls(SetKind.ORTHANT_NEG, dimension=dimension)

    @classmethod
    def box(cls, lower, upper) -> "SetSpec":
        lower, upper = _as_tuple(lower), _as_tuple(upper)
        if len(lower) != len(upper):
            raise ConfigurationError("box corners have different dimensions", field="set.upper")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ConfigurationError("box lower corner exceeds upper corner", field="set.lower")
        return cls(SetKind.BOX, dimension=len(lower), lower=lower, upper=upper)

    @classmethod
    def half_open_interval(cls, lower: float, upper: float) -> "SetSpec":
        if not lower < upper:
            raise ConfigurationError("half-open interval needs lower < upper", field="set.lower")
        return cls(SetKind.HALF_OPEN_INTERVAL, lower=(float(lower),), upper=(float(upper),))

    @classmethod
    def lattice_mask(cls, points) -> "SetSpec":
        pts = tuple(_as_tuple(p) for p in points)
        if not pts:
            raise ConfigurationError("lattice mask needs at least one point", field="set.points")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise ConfigurationError("mask points have mixed dimensions", field="set.points")
        return cls(SetKind.CUSTOM_LATTICE_MASK, dimension=dims.pop(), points=pts,
                   _mask_array=np.array(pts, dtype=np.float64))

    @classmethod
    def from_spec(cls, spec: Dict) -> "SetSpec":
        """Build a set from {"kind": ..., ...} as declared in a configuration file."""
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigurationError("set must be an object with a 'kind' key", field="set")
        try:
            kind = SetKind(spec["kind"])
        except ValueError:
            raise ConfigurationError(f"unsupported set kind {spec['kind']!r}", field="set.kind")
        if kind is SetKind.HALF_LINE_NONNEG:
            out = cls.half_line_nonneg()
        elif kind is SetKind.HALF_LINE_NEG:
            out = cls.half_line_neg()
        elif kind is SetKind.ORTHANT_NONNEG:
            out = cls.orthant_nonneg(int(spec.get("dimension", 2)))
        elif kind is SetKind.ORTHANT_NEG:
            out = cls.orthant_neg(int(spec.get("dimension", 2)))
        elif kind is SetKind.BOX:
            out = cls.box(spec["lower"], spec["upper"])
        elif kind is SetKind.HALF_OPEN_INTERVAL:
            out = cls.half_open_interval(float(spec["lower"]), float(spec["upper"]))
        else:
            out = cls.lattice_mask(spec["points"])
        return out.complement() if spec.get("complement") else out

    # ------------------------------------------------------------------ #
    # Membership
    # ------------------------------------------------------------------ #
    def complement(self) -> "SetSpec":
        return SetSpec(self.kind, self.dimension, self.lower, self.upper, self.points,
                       not self.negated, self._mask_array)

    def contains(self, x) -> np.ndarray:
        inside = self._contains_base(np.asarray(x, dtype=np.float64))
        return ~inside if self.negated else inside

    def __contains__(self, x) -> bool:
        return bool(self.contains(x))

    def _contains_base(self, x: np.ndarray) -> np.ndarray:
        if self.dimension > 1 and x.shape[-1] != self.dimension:
            raise ConfigurationError(
                f"points of dimension {x.shape[-1]} tested against a {self.dimension}-d set"
            )
        kind = self.kind
        if kind is SetKind.HALF_LINE_NONNEG:
            return x >= 0
        if kind is SetKind.HALF_LINE_NEG:
            return x < 0
        if kind is SetKind.ORTHANT_NONNEG:
            return np.all(x >= 0, axis=-1)
        if kind is SetKind.ORTHANT_NEG:
            return np.all(x < 0, axis=-1)
        if kind is SetKind.HALF_OPEN_INTERVAL:
            return (x >= self.lower[0]) & (x < self.upper[0])
        if kind is SetKind.BOX:
            if self.dimension == 1:
                return (x >= self.lower[0]) & (x <= self.upper[0])
            lo, hi = np.array(self.lower), np.array(self.upper)
            return np.all((x >= lo) & (x <= hi), axis=-1)
        # lattice mask
        pts = self._mask_array
        if self.dimension == 1:
            return np.any(np.abs(x[..., None] - pts[:, 0]) <= _MASK_ATOL, axis=-1)
        diff = np.abs(x[..., None, :] - pts)
        return np.any(np.all(diff <= _MASK_ATOL, axis=-1), axis=-1)

    # ------------------------------------------------------------------ #
    # Geometry
    # ------------------------------------------------------------------ #
    @property
    def is_bounded(self) -> bool:
        if self.negated:
            return False
        return self.kind in (SetKind.BOX, SetKind.HALF_OPEN_INTERVAL, SetKind.CUSTOM_LATTICE_MASK)

    def bounds(self) -> Tuple[float, float]:
        """Closed hull (lo, hi) of a one-dimensional set."""
        if self.dimension != 1:
            raise ConfigurationError("bounds are defined for one-dimensional sets")
        if self.negated:
            return -math.inf, math.inf
        if self.kind is SetKind.HALF_LINE_NONNEG:
            return 0.0, math.inf
        if self.kind is SetKind.HALF_LINE_NEG:
            return -math.inf, 0.0
        if self.kind is SetKind.CUSTOM_LATTICE_MASK:
            return float(self._mask_array.min()), float(self._mask_array.max())
        return self.lower[0], self.upper[0]

    def haar_measure(self, lattice_span: float = 0.0) -> float:
        """
        lambda(B) for a bounded one-dimensional set.

        Args:
            lattice_span: h > 0 counts lattice points with mass h each; h = 0
                is Lebesgue measure

        Returns:
            The normalized Haar measure of the set
        """
        if not self.is_bounded:
            return math.inf
        if self.dimension != 1:
            raise ConfigurationError("haar_measure is implemented for one-dimensional sets")
        h = lattice_span
        if self.kind is SetKind.CUSTOM_LATTICE_MASK:
            if h == 0:
                return 0.0
            return h * len({round(p[0] / h) for p in self.points})
        lo, hi = self.lower[0], self.upper[0]
        if h == 0:
            return hi - lo
        first = math.ceil(lo / h - 1e-9)
        if self.kind is SetKind.BOX:
            last = math.floor(hi / h + 1e-9)
        else:
            last = math.ceil(hi / h - 1e-9) - 1
        return h * max(last - first + 1, 0)

    def lattice_points(self, lattice_span: float) -> np.ndarray:
        """Lattice points of a bounded one-dimensional set, in increasing order."""
        h = lattice_span
        if self.kind is SetKind.CUSTOM_LATTICE_MASK:
            return np.unique(self._mask_array[:, 0])
        lo, hi = self.bounds()
        first = math.ceil(lo / h - 1e-9)
        last = math.floor(hi / h + 1e-9)
        pts = np.arange(first, last + 1) * h
        return pts[self.contains(pts)]

    def describe(self) -> Dict:
        out = {"kind": self.kind.value, "dimension": self.dimension}
        if self.lower is not None:
            out["lower"] = list(self.lower)
            out["upper"] = list(self.upper)
        if self.points is not None:
            out["points"] = [list(p) for p in self.points]
        if self.negated:
            out["complement"] = True
        return out


def _as_tuple(value) -> Tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),)
    return tuple(float(v) for v in value)
