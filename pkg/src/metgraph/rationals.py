"""Exact rational arithmetic helpers.

Everything in this package computes over the rationals; floating point
never enters a feasibility decision.  gmpy2's mpq is used when available
(it is several times faster than fractions.Fraction on the small numbers
that dominate here), with Fraction as a drop-in fallback.
"""
from __future__ import annotations

from typing import Union

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _Q

RatLike = Union[int, str, "Rat"]


def rat(value: RatLike = 0, den: int | None = None):
    """Build an exact rational from an int, a 'p/q' string, or another rational."""
    if den is not None:
        return _Q(value, den)
    if isinstance(value, str):
        return _Q(value.strip())
    return _Q(value)


# The concrete rational type, for isinstance checks and annotations.
Rat = type(_Q(0))

ZERO = rat(0)
ONE = rat(1)


def rat_str(q) -> str:
    """Render a rational as 'p/q', or plain 'p' when integral."""
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_int(q) -> bool:
    return rat(q).denominator == 1


def floor_rat(q) -> int:
    q = rat(q)
    return q.numerator // q.denominator


def ceil_rat(q) -> int:
    q = rat(q)
    return -((-q.numerator) // q.denominator)
