"""
Exact parsing of numbers declared in experiment configuration files.
"""

import re
from fractions import Fraction
from typing import Union

from utils.errors import ConfigurationError

# Decimal ("0.25", "-1e-3") or rational ("2/3") literals
_DECIMAL = re.compile(r'^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$')
_RATIONAL = re.compile(r'^([+-]?\d+)\s*/\s*(\d+)$')


def parse_exact(value: Union[str, int, float, Fraction]) -> Fraction:
    """
    Parse a support point or weight exactly.

    Args:
        value: Decimal string, "p/q" string, int, Fraction, or float
            (floats are taken at their exact binary value)

    Returns:
        The exact rational value
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigurationError(f"expected a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        rational = _RATIONAL.match(text)
        if rational:
            denominator = int(rational.group(2))
            if denominator == 0:
                raise ConfigurationError(f"zero denominator in {value!r}")
            return Fraction(int(rational.group(1)), denominator)
        if _DECIMAL.match(text):
            return Fraction(text)
    raise ConfigurationError(f"cannot parse {value!r} as an exact number")
