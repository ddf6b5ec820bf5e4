#!/usr/bin/env python3
"""
Numeric Helpers

Exact-rational parsing, the s-power used by every cover evaluation, and the
string formats numbers take in JSON/CSV output. Importing this module sets
the mpmath working precision from settings.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Union

import mpmath

import settings
from errors import InputError

logger = logging.getLogger(__name__)

mpmath.mp.prec = settings.PRECISION_BITS

Number = Union[Fraction, mpmath.mpf]
REPORT_DIGITS = 30


def set_precision(bits: int) -> None:
    """Set the global mpmath working precision"""
    if bits < 53:
        raise InputError(f"precision must be at least 53 bits, got {bits}")
    mpmath.mp.prec = bits
    _fraction_power.cache_clear()
    logger.debug(f"mpmath precision set to {bits} bits")


def as_fraction(value: Any) -> Fraction:
    """Convert ints, Fractions, 'a/b' or decimal strings and floats to a Fraction"""
    if isinstance(value, bool):
        raise InputError(f"expected a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # decimal reading of the float, so 0.3 means 3/10
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational number: {value!r}") from exc
    raise InputError(f"expected a number, got {type(value).__name__}")


def parse_number_list(text: str) -> List[Fraction]:
    """Parse a comma-separated list such as '0.3,0.7' or '1/3,2/3'"""
    parts = [part for part in text.split(',') if part.strip()]
    if not parts:
        raise InputError(f"empty number list: {text!r}")
    return [as_fraction(part) for part in parts]


def validate_exponent(s: Any) -> Fraction:
    """Return s as a Fraction, requiring 0 < s <= 1"""
    exponent = as_fraction(s)
    if not 0 < exponent <= 1:
        raise InputError(f"exponent s must lie in (0, 1], got {exponent}")
    return exponent


def to_mpf(value: Any) -> mpmath.mpf:
    """Convert an exact or approximate number to an mpf at working precision"""
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, mpmath.mpf):
        return value
    if isinstance(value, int):
        return mpmath.mpf(value)
    if hasattr(value, 'to_mpf'):
        return value.to_mpf()
    return mpmath.mpf(value)


@lru_cache(maxsize=65536)
def _fraction_power(length: Fraction, s: Fraction) -> Number:
    if s == 1:
        return length
    return to_mpf(length) ** to_mpf(s)


def power(length: Any, s: Fraction) -> Number:
    """|C|^s: exact for rational lengths when s == 1, an mpf otherwise"""
    if isinstance(length, Fraction):
        return _fraction_power(length, s)
    if s == 1:
        return to_mpf(length)
    return to_mpf(length) ** to_mpf(s)


def is_exact(value: Any) -> bool:
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def format_number(value: Any) -> str:
    """Exact values as 'a/b' (or 'a'), everything else as a fixed-width decimal"""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return mpmath.nstr(to_mpf(value), REPORT_DIGITS, strip_zeros=False)


def error_radius(value: Any) -> str:
    """Rounding radius attached to an inexact value"""
    if is_exact(value):
        return "0"
    magnitude = max(mpmath.mpf(1), abs(to_mpf(value)))
    radius = magnitude * mpmath.mpf(2) ** (16 - mpmath.mp.prec)
    return mpmath.nstr(radius, 3)


def number_payload(value: Any) -> Dict[str, str]:
    """JSON form of a number: value plus error radius"""
    return {'value': format_number(value), 'radius': error_radius(value)}


def to_float(value: Any) -> float:
    if isinstance(value, Fraction):
        return float(value)
    return float(to_mpf(value))
