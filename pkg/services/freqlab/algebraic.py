#!/usr/bin/env python3
"""
Beta Arithmetic

Numbers of the form sum c_i * beta^i with rational coefficients, and the
certified decisions (sign, floor) the greedy expansion needs.

Two kinds of base are supported. An AlgebraicBeta is given by an integer
polynomial and an isolating interval; its elements are reduced modulo the
minimal polynomial, so equality and zero tests are exact. An
ApproximateBeta is only known as a decimal value with an error radius;
zero tests there are numerical and results are flagged as uncertified.
Signs are decided by interval evaluation (mpmath.iv) with a margin of four
radii, doubling the precision until the decision is made or the ceiling is hit.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import sympy

import settings
from errors import InputError, PrecisionError
from numeric import as_fraction

logger = logging.getLogger(__name__)

iv = mpmath.iv


class BetaNumber:
    """Immutable element of Q[beta]: coefficients of beta^low, beta^(low+1), ..."""

    __slots__ = ('field', 'low', 'coeffs')

    def __init__(self, field: 'BetaField', low: int, coeffs: Tuple[Fraction, ...]):
        self.field = field
        self.low = low
        self.coeffs = coeffs

    def terms(self) -> Dict[int, Fraction]:
        return {self.low + i: c for i, c in enumerate(self.coeffs) if c}

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: Any) -> 'BetaNumber':
        return self.field.add(self, self.field.coerce(other))

    __radd__ = __add__

    def __sub__(self, other: Any) -> 'BetaNumber':
        return self.field.add(self, self.field.negate(self.field.coerce(other)))

    def __rsub__(self, other: Any) -> 'BetaNumber':
        return self.field.add(self.field.coerce(other), self.field.negate(self))

    def __neg__(self) -> 'BetaNumber':
        return self.field.negate(self)

    def __mul__(self, other: Any) -> 'BetaNumber':
        if isinstance(other, BetaNumber):
            return self.field.multiply(self, other)
        return self.field.scale(self, as_fraction(other))

    __rmul__ = __mul__

    def times_beta(self, power: int = 1) -> 'BetaNumber':
        result = self
        for _ in range(power):
            result = self.field.mul_beta(result)
        return result

    def over_beta(self, power: int = 1) -> 'BetaNumber':
        result = self
        for _ in range(power):
            result = self.field.div_beta(result)
        return result

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field.coerce(other)
        if not isinstance(other, BetaNumber) or other.field is not self.field:
            return NotImplemented
        return self.terms() == other.terms()

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms().items())))

    def to_mpf(self) -> mpmath.mpf:
        return self.field.to_mpf(self)

    def __repr__(self) -> str:
        parts = [f"{c}*b^{e}" for e, c in sorted(self.terms().items())]
        return f"BetaNumber({' + '.join(parts) or '0'})"


def _iv_rational(value: Fraction):
    return iv.mpf(value.numerator) / value.denominator


def _raw_sign(raw: tuple) -> int:
    sign, man = raw[0], raw[1]
    if not man:
        return 0
    return -1 if sign else 1


def interval_sign(value) -> Optional[int]:
    """Sign of an interval if it excludes zero, else None"""
    lo, hi = value._mpi_
    if _raw_sign(lo) > 0:
        return 1
    if _raw_sign(hi) < 0:
        return -1
    return None


def interval_bounds(value) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """Endpoints of an mpmath interval as ordinary mpf numbers"""
    lo, hi = value._mpi_
    return mpmath.mpf(lo), mpmath.mpf(hi)


class BetaField:
    """Shared arithmetic for both kinds of base"""

    exact = False

    def __init__(self):
        self.zero = self.rational(Fraction(0))
        self.one = self.rational(Fraction(1))

    # construction
    def rational(self, value: Any) -> BetaNumber:
        raise NotImplementedError

    def coerce(self, value: Any) -> BetaNumber:
        if isinstance(value, BetaNumber):
            if value.field is not self:
                raise InputError("cannot mix numbers from different bases")
            return value
        return self.rational(as_fraction(value))

    def beta(self) -> BetaNumber:
        return self.mul_beta(self.one)

    # arithmetic
    def add(self, a: BetaNumber, b: BetaNumber) -> BetaNumber:
        raise NotImplementedError

    def negate(self, a: BetaNumber) -> BetaNumber:
        return self.scale(a, Fraction(-1))

    def scale(self, a: BetaNumber, q: Fraction) -> BetaNumber:
        raise NotImplementedError

    def multiply(self, a: BetaNumber, b: BetaNumber) -> BetaNumber:
        result = self.zero
        for exponent, coeff in b.terms().items():
            term = self.scale(a, coeff)
            if exponent >= 0:
                term = term.times_beta(exponent)
            else:
                term = term.over_beta(-exponent)
            result = self.add(result, term)
        return result

    def mul_beta(self, a: BetaNumber) -> BetaNumber:
        raise NotImplementedError

    def div_beta(self, a: BetaNumber) -> BetaNumber:
        raise NotImplementedError

    # numerics
    def beta_interval(self, prec: int):
        raise NotImplementedError

    def max_precision(self) -> int:
        return settings.MAX_PRECISION_BITS

    def precision_schedule(self) -> List[int]:
        ceiling = self.max_precision()
        prec = min(settings.PRECISION_BITS, ceiling)
        schedule = [prec]
        while prec < ceiling:
            prec = min(prec * 2, ceiling)
            schedule.append(prec)
        return schedule

    def interval(self, a: BetaNumber, prec: int):
        """Interval enclosure of a at the given working precision"""
        saved = iv.prec
        iv.prec = prec
        try:
            b = self.beta_interval(prec)
            terms = a.terms()
            if not terms:
                return iv.mpf(0)
            low, high = min(terms), max(terms)
            acc = iv.mpf(0)
            for exponent in range(high, low - 1, -1):
                acc = acc * b + _iv_rational(terms.get(exponent, Fraction(0)))
            if low > 0:
                acc = acc * b ** low
            elif low < 0:
                acc = acc / b ** (-low)
            return acc
        finally:
            iv.prec = saved

    def is_zero(self, a: BetaNumber) -> bool:
        return a.is_zero()

    def sign(self, a: BetaNumber, index: Optional[int] = None) -> int:
        """Certified sign of a; raises PrecisionError when undecidable"""
        a = self.coerce(a)
        if self.is_zero(a):
            return 0
        for prec in self.precision_schedule():
            value = self.interval(a, prec)
            saved = iv.prec
            iv.prec = prec
            try:
                widened = value.mid + iv.mpf([-4, 4]) * (value.delta / 2)
            finally:
                iv.prec = saved
            decided = interval_sign(widened)
            if decided is not None:
                return decided
            logger.debug(f"sign undecided at {prec} bits, escalating")
        raise PrecisionError(
            f"cannot decide sign at {self.max_precision()} bits"
            + (f" (digit index {index})" if index is not None else ""),
            index=index, precision=self.max_precision(),
        )

    def is_negligible(self, a: BetaNumber) -> bool:
        """True when a's enclosure at the precision ceiling still contains zero"""
        value = self.interval(self.coerce(a), self.max_precision())
        return interval_sign(value) is None

    def compare(self, a: Any, b: Any, index: Optional[int] = None) -> int:
        return self.sign(self.coerce(a) - self.coerce(b), index=index)

    def floor(self, a: BetaNumber, index: Optional[int] = None) -> int:
        """Certified floor of a"""
        a = self.coerce(a)
        k = int(mpmath.floor(self.to_mpf(a)))
        for _ in range(4):
            if self.sign(a - k, index=index) < 0:
                k -= 1
                continue
            if self.sign(a - (k + 1), index=index) >= 0:
                k += 1
                continue
            return k
        raise PrecisionError(f"floor did not settle (digit index {index})", index=index)

    def to_mpf(self, a: BetaNumber) -> mpmath.mpf:
        value = self.interval(self.coerce(a), mpmath.mp.prec + 32)
        lo, hi = interval_bounds(value)
        return (lo + hi) / 2

    def value(self) -> mpmath.mpf:
        return self.to_mpf(self.beta())

    def describe(self) -> Dict[str, Any]:
        raise NotImplementedError


class AlgebraicBeta(BetaField):
    """beta as the unique root of an irreducible integer polynomial in an isolating interval"""

    exact = True

    def __init__(self, polynomial: Sequence[Any], isolating: Sequence[Any]):
        coefficients = [as_fraction(c) for c in polynomial]
        while coefficients and coefficients[0] == 0:
            coefficients.pop(0)
        if len(coefficients) < 2:
            raise InputError("the defining polynomial must have degree at least 1")
        scale = math.lcm(*(c.denominator for c in coefficients))
        self.polynomial = [int(c * scale) for c in coefficients]
        if len(isolating) != 2:
            raise InputError("isolating interval needs exactly two endpoints")
        self.isolating = (as_fraction(isolating[0]), as_fraction(isolating[1]))
        if not self.isolating[0] < self.isolating[1]:
            raise InputError("isolating interval must have lo < hi")

        x = sympy.Symbol('x')
        self._poly = sympy.Poly(self.polynomial, x, domain='ZZ')
        if not self._poly.is_irreducible:
            raise InputError(f"polynomial {self._poly.as_expr()} is reducible over Q")
        lo, hi = (sympy.Rational(v.numerator, v.denominator) for v in self.isolating)
        roots = self._poly.count_roots(lo, hi)
        if roots != 1:
            raise InputError(f"isolating interval contains {roots} roots, expected exactly 1")

        self.degree = self._poly.degree()
        # leading coefficient first -> a_d ... a_0
        a = [Fraction(c) for c in reversed(self.polynomial)]
        self._top = tuple(-a[i] / a[self.degree] for i in range(self.degree))
        self._inverse = tuple(-a[i + 1] / a[0] for i in range(self.degree))
        self._intervals: Dict[int, Tuple[Fraction, Fraction]] = {}
        super().__init__()

        lo_q, hi_q = self.rational_bounds(64)
        if not (lo_q > 1 and hi_q < 2):
            raise InputError(f"beta must lie strictly between 1 and 2, got about {float(lo_q)}")
        logger.info(f"algebraic base {self._poly.as_expr()} = 0 near {float(lo_q):.12f}")

    def rational(self, value: Any) -> BetaNumber:
        value = as_fraction(value)
        return BetaNumber(self, 0, (value,) + (Fraction(0),) * (self.degree - 1))

    def add(self, a: BetaNumber, b: BetaNumber) -> BetaNumber:
        return BetaNumber(self, 0, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    def scale(self, a: BetaNumber, q: Fraction) -> BetaNumber:
        return BetaNumber(self, 0, tuple(c * q for c in a.coeffs))

    def mul_beta(self, a: BetaNumber) -> BetaNumber:
        top = a.coeffs[-1]
        shifted = (Fraction(0),) + a.coeffs[:-1]
        return BetaNumber(self, 0, tuple(c + top * r for c, r in zip(shifted, self._top)))

    def div_beta(self, a: BetaNumber) -> BetaNumber:
        bottom = a.coeffs[0]
        shifted = a.coeffs[1:] + (Fraction(0),)
        return BetaNumber(self, 0, tuple(c + bottom * q for c, q in zip(shifted, self._inverse)))

    def rational_bounds(self, bits: int) -> Tuple[Fraction, Fraction]:
        """Rational lo < beta < hi (or lo == hi for rational beta) of width below 2^-bits"""
        if bits not in self._intervals:
            if self.degree == 1:
                root = Fraction(-self.polynomial[1], self.polynomial[0])
                self._intervals[bits] = (root, root)
            else:
                lo, hi = (sympy.Rational(v.numerator, v.denominator) for v in self.isolating)
                a, b = self._poly.refine_root(lo, hi, eps=sympy.Rational(1, 2 ** bits))
                self._intervals[bits] = (
                    Fraction(int(a.p), int(a.q)),
                    Fraction(int(b.p), int(b.q)),
                )
        return self._intervals[bits]

    def beta_interval(self, prec: int):
        lo, hi = self.rational_bounds(prec + 8)
        return iv.mpf([_iv_rational(lo), _iv_rational(hi)])

    def describe(self) -> Dict[str, Any]:
        return {
            'type': 'beta',
            'polynomial': list(self.polynomial),
            'isolating': [str(self.isolating[0]), str(self.isolating[1])],
        }


class ApproximateBeta(BetaField):
    """beta known only as a decimal value within 2^-precision_bits"""

    exact = False

    def __init__(self, value: str, precision_bits: int):
        self.text = str(value).strip()
        self.center = as_fraction(self.text)
        if precision_bits < 16:
            raise InputError("precision_bits must be at least 16")
        self.precision_bits = int(precision_bits)
        self.radius = Fraction(1, 2 ** self.precision_bits)
        if not (self.center - self.radius > 1 and self.center + self.radius < 2):
            raise InputError(f"beta must lie strictly between 1 and 2, got {self.text}")
        super().__init__()
        logger.info(f"approximate base {self.text[:24]} with {self.precision_bits}-bit radius")

    def _make(self, terms: Dict[int, Fraction]) -> BetaNumber:
        terms = {e: c for e, c in terms.items() if c}
        if not terms:
            return BetaNumber(self, 0, ())
        low, high = min(terms), max(terms)
        return BetaNumber(self, low, tuple(terms.get(e, Fraction(0)) for e in range(low, high + 1)))

    def rational(self, value: Any) -> BetaNumber:
        return self._make({0: as_fraction(value)})

    def add(self, a: BetaNumber, b: BetaNumber) -> BetaNumber:
        terms = a.terms()
        for e, c in b.terms().items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return self._make(terms)

    def scale(self, a: BetaNumber, q: Fraction) -> BetaNumber:
        return self._make({e: c * q for e, c in a.terms().items()})

    def mul_beta(self, a: BetaNumber) -> BetaNumber:
        return BetaNumber(self, a.low + 1, a.coeffs) if a.coeffs else a

    def div_beta(self, a: BetaNumber) -> BetaNumber:
        return BetaNumber(self, a.low - 1, a.coeffs) if a.coeffs else a

    def max_precision(self) -> int:
        return min(settings.MAX_PRECISION_BITS, self.precision_bits + 64)

    def beta_interval(self, prec: int):
        lo = _iv_rational(self.center - self.radius)
        hi = _iv_rational(self.center + self.radius)
        return iv.mpf([lo, hi])

    def describe(self) -> Dict[str, Any]:
        return {'type': 'beta', 'value': self.text, 'precision_bits': self.precision_bits}
