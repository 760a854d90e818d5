"""Exact number types: rationals, dyadic rationals and rational intervals.

Rationals are plain :class:`fractions.Fraction` objects, which are always
stored reduced with a positive denominator.  Dyadic numbers get their own
type because every partial sum of the question-mark series is of the form
``m * 2**e`` and shifting exponents is much cheaper than taking gcds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from .errors import InvalidArgument

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)\s*\*\s*2\^\s*([+-]?\d+)\s*$")


def rat_make(n: int, d: int) -> Fraction:
    """Return the reduced fraction ``n/d``; the sign is carried by the numerator."""
    if d == 0:
        raise InvalidArgument("zero denominator")
    return Fraction(n, d)


def format_rational(x: Fraction) -> str:
    """Serialize as ``"p/q"``, integers included (``"1/1"``, ``"0/1"``)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise InvalidArgument(f"not a rational: {text!r}")
    num, den = m.group(1), m.group(2)
    return rat_make(int(num), int(den) if den is not None else 1)


def _bit_trim(m: int, e: int) -> tuple[int, int]:
    if m == 0:
        return 0, 0
    tz = (m & -m).bit_length() - 1
    return m >> tz, e + tz


@total_ordering
@dataclass(frozen=True, init=False)
class Dyadic:
    """The number ``mantissa * 2**exponent`` with an odd (or zero) mantissa."""

    mantissa: int
    exponent: int

    def __init__(self, mantissa: int, exponent: int = 0):
        m, e = _bit_trim(int(mantissa), int(exponent))
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def power_of_two(cls, e: int) -> Dyadic:
        return cls(1, e)

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __add__(self, other: Dyadic) -> Dyadic:
        if not isinstance(other, Dyadic):
            return NotImplemented
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        e = min(self.exponent, other.exponent)
        m = (self.mantissa << (self.exponent - e)) + (other.mantissa << (other.exponent - e))
        return Dyadic(m, e)

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.mantissa, self.exponent)

    def __sub__(self, other: Dyadic) -> Dyadic:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: Dyadic) -> Dyadic:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other: object) -> bool:
        if isinstance(other, Dyadic):
            return self.to_fraction() < other.to_fraction()
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() < other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __str__(self) -> str:
        return f"{self.mantissa}*2^{self.exponent}"

    @classmethod
    def parse(cls, text: str) -> Dyadic:
        m = _DYADIC_RE.match(text)
        if m is None:
            raise InvalidArgument(f"not a dyadic: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class RatInterval:
    """Closed interval ``[lo, hi]`` with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise InvalidArgument(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> RatInterval:
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: RatInterval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __add__(self, other):
        if isinstance(other, RatInterval):
            return RatInterval(self.lo + other.lo, self.hi + other.hi)
        return RatInterval(self.lo + other, self.hi + other)

    def __neg__(self) -> RatInterval:
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, RatInterval):
            return self + (-other)
        return self + (-other)

    def scale(self, c) -> RatInterval:
        c = Fraction(c)
        if c >= 0:
            return RatInterval(self.lo * c, self.hi * c)
        return RatInterval(self.hi * c, self.lo * c)

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}


def interval_width(i: RatInterval) -> Fraction:
    return i.hi - i.lo
