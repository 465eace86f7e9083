"""Exact rational helpers shared by every module.

Parameters that enter exact checks are written as ``num/den`` strings and
parsed to :class:`fractions.Fraction`; decimal inputs are rejected so that
nothing silently becomes a float.
"""
from __future__ import annotations

import math
import re
from decimal import Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(value) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer) into a Fraction.

    Fractions and ints pass through. Floats and decimal strings raise
    ``ValueError``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"not a rational: {value!r} (use 'num/den')")
    match = _RATIONAL_RE.match(value)
    if match is None:
        raise ValueError(f"not a rational: {value!r} (use 'num/den')")
    num, den = match.groups()
    den = int(den) if den is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {value!r}")
    return Fraction(int(num), den)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Return the rational square root of ``q`` or None if it is irrational."""
    q = Fraction(q)
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def decimal_string(q: Fraction, digits: int = 12) -> str:
    """Render ``q`` rounded half-even to ``digits`` decimal places."""
    q = Fraction(q)
    with localcontext() as ctx:
        ctx.prec = max(50, digits + len(str(abs(q.numerator))) + 5)
        value = Decimal(q.numerator) / Decimal(q.denominator)
        return str(value.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


def ceil_fraction(q: Fraction) -> int:
    q = Fraction(q)
    return -((-q.numerator) // q.denominator)
