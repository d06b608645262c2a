"""Exact rational arithmetic helpers.

All quantities in this package (costs, delays, shares, LP data) are
`fractions.Fraction` values.  Serialized form is always the string "p/q"
with q > 0 and gcd(|p|, q) = 1, which Fraction guarantees internally.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .errors import InputError

Rational = Fraction

RationalLike = Union[Fraction, int, str]


def rat(value: RationalLike) -> Fraction:
    """Coerce ints and "p/q" strings to Fraction.  Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError("bool is not a rational value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise InputError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (or a bare integer string) into a Fraction.

    Fraction's own parser also accepts decimal and scientific notation;
    those are deliberately rejected here to keep files bit-exact.
    """
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed rational {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Canonical "p/q" form, always with an explicit denominator."""
    return f"{value.numerator}/{value.denominator}"


def approx(value: Fraction, digits: int = 6) -> str:
    """Human-oriented decimal rendering.  Never used in machine output."""
    return f"{float(value):.{digits}g}"
