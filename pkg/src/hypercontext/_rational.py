"""Exact-rational parsing and formatting shared by the JSON formats."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def as_fraction(value) -> Fraction:
    """Coerce ``value`` to a Fraction without passing through floating point.

    Accepts ints, Fractions and ``"num/den"`` / ``"num"`` strings. Floats are
    refused on purpose: a float probability silently loses exactness.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE"):
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"
