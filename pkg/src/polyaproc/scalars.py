"""Scalar parsing and the exact/float arithmetic split."""

from __future__ import annotations

import math
import numbers
import re
from fractions import Fraction
from typing import Iterable

from .errors import MixedArithmeticError, ScalarParseError

Scalar = "Fraction | float | complex"

_INT_RE = re.compile(r"^[+-]?\d+$")
_RATIO_RE = re.compile(r"^([+-]?\d+)\s*/\s*([+-]?\d+)$")


def parse_scalar(value) -> Fraction | float:
    """Parse ``"p/q"`` strings, integers and decimals.

    Integers and ratios become :class:`Fraction`; decimal or exponent
    notation becomes ``float``.
    """
    if isinstance(value, bool):
        raise ScalarParseError(f"booleans are not scalars: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ScalarParseError(f"non-finite scalar {value!r}")
        return value
    if not isinstance(value, str):
        raise ScalarParseError(f"cannot parse scalar from {type(value).__name__}")
    text = value.strip()
    if _INT_RE.match(text):
        return Fraction(int(text))
    m = _RATIO_RE.match(text)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den == 0:
            raise ScalarParseError(f"zero denominator in {value!r}")
        return Fraction(num, den)
    try:
        out = float(text)
    except ValueError:
        raise ScalarParseError(f"cannot parse scalar {value!r}") from None
    if not math.isfinite(out):
        raise ScalarParseError(f"non-finite scalar {value!r}")
    return out


def arithmetic_mode(values: Iterable) -> str:
    """Return ``"exact"`` if every value is rational, ``"float"`` if every value is a float."""
    kinds = {isinstance(v, Fraction) for v in values}
    if kinds == {True, False}:
        raise MixedArithmeticError("process mixes rational and floating-point scalars")
    return "float" if kinds == {False} else "exact"


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def format_scalar(x):
    """JSON-friendly rendering: ``"p/q"`` for rationals, ``[re, im]`` for complex."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, complex):
        if x.imag == 0:
            return x.real
        return [x.real, x.imag]
    return float(x)


def to_complex(x) -> complex:
    return complex(float(x.real), float(x.imag)) if isinstance(x, complex) else complex(float(x))


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def fraction_gcd(values: Iterable[Fraction]) -> Fraction:
    """Positive generator of the additive group spanned by rationals (0 if all vanish)."""
    vals = [Fraction(v) for v in values]
    den = lcm_of_denominators(vals)
    g = 0
    for v in vals:
        g = math.gcd(g, int(v * den))
    return Fraction(g, den)
