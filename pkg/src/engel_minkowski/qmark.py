"""The Engel-Minkowski question-mark function and its structural properties.

For a point with a-digits ``a1, a2, ...`` and ``Ak = a1 + ... + ak``::

    ?EM(x) = 2^(1-A1) - 2^(1-A2) + 2^(1-A3) - ...

Equivalently ``?EM(x) = 2^(1-a1) - 2^(-a1) ?EM(shift_a(x))``, which is the
recursion used for exact evaluation of periodic specs, for inversion and
for the functional-equation check.  A finite spec is summed as a finite
series, i.e. its empty tail contributes zero.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .digits import (
    Alphabet,
    DigitSpec,
    _as_a,
    a_to_q,
    cylinder_measure,
    engel_decode,
    format_spec,
)
from .errors import InvalidArgument, OutOfDomain, Unsupported
from .numerics import Dyadic, RatInterval, format_rational


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QMarkValue:
    """Partial sum of the series to ``depth`` terms plus the size of the tail.

    The tail equals ``(-1)^depth * error_radius * ?EM(shift_a^depth x)`` with
    the last factor in [0, 1], so the enclosure is one-sided: below the
    partial sum for odd depth, above it for even depth.
    """

    partial: Dyadic
    error_radius: Dyadic
    depth: int

    def enclosure(self) -> RatInterval:
        p = self.partial.to_fraction()
        r = self.error_radius.to_fraction()
        if self.depth % 2:
            return RatInterval(p - r, p)
        return RatInterval(p, p + r)

    def to_json(self) -> dict:
        return {
            "partial": str(self.partial),
            "error_radius": str(self.error_radius),
            "depth": self.depth,
        }


def _partial_sums(digits):
    """Yield ``(k, A_k, P_k)`` with ``P_k`` the k-term partial sum."""
    total = Dyadic(0)
    A = 0
    for k, a in enumerate(digits, start=1):
        A += a
        term = Dyadic(1, 1 - A)
        total = total + term if k % 2 else total - term
        yield k, A, total


def qmark_eval(spec: DigitSpec, depth: int) -> QMarkValue:
    """Enclosure of ``?EM`` from the first ``depth`` a-digits.

    The radius is always ``2^-A_depth``: a finite spec is treated as the
    prefix of every point in its cylinder, and its own finite sum (empty
    tail) is one of them.  Finite specs shorter than ``depth`` stop early.
    """
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    spec = _as_a(spec)
    last = (0, 0, Dyadic(0))
    for last in _partial_sums(itertools.islice(spec.digits(), depth)):
        pass
    k, A, total = last
    if k == 0:
        raise InvalidArgument("cannot evaluate an empty spec")
    return QMarkValue(total, Dyadic(1, -A), k)


def _alternating_sum(digits: Sequence[int]) -> tuple[Fraction, int]:
    """``(sum_k (-1)^(k+1) 2^(1-A_k), A_n)`` over a finite digit list."""
    total = Fraction(0)
    A = 0
    for k, a in enumerate(digits, start=1):
        A += a
        term = Fraction(2, 1 << A)
        total += term if k % 2 else -term
    return total, A


def qmark_exact(spec: DigitSpec) -> Fraction:
    """Exact rational value for finite or eventually periodic specs."""
    spec = _as_a(spec)
    if spec.is_rule:
        raise Unsupported("rule specs have no closed form; use qmark_eval")
    head, A = _alternating_sum(spec.preperiod)
    if spec.period is None:
        return head
    # one period scales the tail by (-1)^L 2^-P
    L, P = len(spec.period), sum(spec.period)
    block, _ = _alternating_sum(spec.period)
    tail = block / (1 - Fraction((-1) ** L, 1 << P))
    m = len(spec.preperiod)
    return head + Fraction((-1) ** m, 1 << A) * tail


def qmark_inverse(y: Fraction) -> DigitSpec:
    """a-digits of a point whose ``?EM`` value is ``y``.

    Works on ``g = y/2``: the digit is the unique ``a`` with
    ``2^(-a-1) < g <= 2^(-a)`` and the orbit continues with ``1 - 2^a g``.
    A zero remainder ends a finite spec; a repeated remainder closes a period.
    """
    y = Fraction(y)
    if not 0 < y <= 1:
        raise OutOfDomain(f"{y} is not in (0, 1]")
    # g = n/d keeps the denominator of y/2 along the whole orbit
    n, d = y.numerator, 2 * y.denominator
    seen: dict[int, int] = {}
    digits: list[int] = []
    while n != 0:
        if n in seen:
            i = seen[n]
            return DigitSpec(Alphabet.A, tuple(digits[:i]), tuple(digits[i:])).canonical()
        seen[n] = len(digits)
        # largest a with n * 2^a <= d
        a = d.bit_length() - n.bit_length()
        if n << a > d:
            a -= 1
        digits.append(a)
        n = d - (n << a)
    return DigitSpec(Alphabet.A, tuple(digits))


# --------------------------------------------------------------------------
# Functional equation
# --------------------------------------------------------------------------


def _half_qmark_enclosure(spec: DigitSpec, skip: int, depth: int) -> RatInterval:
    """Enclosure of ``?EM(shift_a^skip x) / 2`` for an infinite spec."""
    digits = tuple(itertools.islice(spec.digits(), skip, skip + depth))
    total, A = _alternating_sum(digits)
    r = Fraction(1, 1 << A)
    iv = RatInterval(total - r, total) if len(digits) % 2 else RatInterval(total, total + r)
    return iv.scale(Fraction(1, 2))


def functional_check(spec: DigitSpec, n: int, depth: int = 64):
    """Residual of ``f(s^(n-1) x) = 2^-a_n - 2^-a_n f(s^n x)`` with ``f = ?EM/2``.

    ``s`` is the a-digit shift.  Finite and periodic specs give an exact
    :class:`~fractions.Fraction` residual, which must be zero.  Rule specs give
    a :class:`RatInterval` enclosure of the residual, which must contain zero.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    spec = _as_a(spec)
    if spec.is_finite and n > len(spec.preperiod):
        raise InvalidArgument(f"finite spec has no digit a_{n}")
    if spec.is_rule:
        a_n = spec.digit(n)
        lhs = _half_qmark_enclosure(spec, n - 1, depth)
        inner = _half_qmark_enclosure(spec, n, depth)
        w = Fraction(1, 1 << a_n)
        rhs = (-inner.scale(w)) + w
        return lhs - rhs
    before = spec.drop(n - 1)
    after = spec.drop(n)
    a_n = before.digit(1)
    w = Fraction(1, 1 << a_n)
    return qmark_exact(before) / 2 - (w - w * qmark_exact(after) / 2)


# --------------------------------------------------------------------------
# Derivative analysis
# --------------------------------------------------------------------------


class Trend(str, enum.Enum):
    TENDS_TO_ZERO = "TendsToZero"
    TENDS_TO_INFINITY = "TendsToInfinity"
    UNIT_CONSTANT = "UnitConstant"
    UNDETERMINED = "Undetermined"


# running log2-product must be monotone after this index and end beyond +-LOG2_LIMIT
TREND_START = 10
LOG2_LIMIT = 32.0


@dataclass(frozen=True)
class DerivativeTrace:
    ratios: list[Fraction]
    products: list[Fraction]
    log2_products: list[float]
    classification: Trend

    def to_json(self) -> dict:
        return {
            "ratios": [format_rational(r) for r in self.ratios],
            "log2_products": self.log2_products,
            "classification": self.classification.value,
        }


def _log2(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


def classify_trend(ratios: Sequence[Fraction], log2_products: Sequence[float]) -> Trend:
    if all(r == 1 for r in ratios):
        return Trend.UNIT_CONSTANT
    window = log2_products[TREND_START - 1:]
    if len(window) >= 2:
        steps = [b - a for a, b in zip(window, window[1:])]
        if all(s >= 0 for s in steps) and window[-1] > LOG2_LIMIT:
            return Trend.TENDS_TO_INFINITY
        if all(s <= 0 for s in steps) and window[-1] < -LOG2_LIMIT:
            return Trend.TENDS_TO_ZERO
    return Trend.UNDETERMINED


def derivative_trace(spec: DigitSpec, depth: int) -> DerivativeTrace:
    """Ratios ``tau_r / 2^a_r`` and their running products up to ``depth``.

    ``tau_r = 2 + a1 + ... + ar - r`` is the r-th q-digit.  The product is
    the candidate derivative at the point; the trace reports how it behaves
    over the computed window instead of claiming a limit.
    """
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    spec = _as_a(spec)
    ratios, products, logs = [], [], []
    tau, prod = 2, Fraction(1)
    for a in itertools.islice(spec.digits(), depth):
        tau += a - 1
        r = Fraction(tau, 1 << a)
        prod *= r
        ratios.append(r)
        products.append(prod)
        logs.append(_log2(prod))
    return DerivativeTrace(ratios, products, logs, classify_trend(ratios, logs))


@dataclass(frozen=True)
class CylinderDerivative:
    """Two difference quotients over the rank-n cylinders of a base.

    ``displayed[n-1]`` is ``tau_1...tau_n / 2^(c1+...+cn)``.  ``raw[n-1]`` is
    the length of the ``?EM``-image of the rank-n cylinder divided by its
    Lebesgue measure.
    """

    displayed: list[Fraction]
    raw: list[Fraction]
    image_lengths: list[Fraction]
    measures: list[Fraction]

    def to_json(self) -> dict:
        return {
            "displayed": [format_rational(x) for x in self.displayed],
            "raw": [format_rational(x) for x in self.raw],
        }


def cylinder_image(base: Sequence[int]) -> RatInterval:
    """Closure of ``?EM`` over the a-cylinder with the given base.

    The extreme tails are the empty one (value 0) and ``[1]`` (value 1),
    so the endpoints are two exact finite evaluations.
    """
    base = tuple(base)
    v0 = qmark_exact(DigitSpec(Alphabet.A, base))
    v1 = qmark_exact(DigitSpec(Alphabet.A, base + (1,)))
    return RatInterval(min(v0, v1), max(v0, v1))


def cylinder_derivative(base: Sequence[int]) -> CylinderDerivative:
    base = tuple(int(c) for c in base)
    if not base or any(c < 1 for c in base):
        raise InvalidArgument("base must be a nonempty list of a-digits >= 1")
    displayed, raw, lengths, measures = [], [], [], []
    tau, tau_prod, A = 2, 1, 0
    taus = []
    for n, c in enumerate(base, start=1):
        tau += c - 1
        taus.append(tau)
        tau_prod *= tau
        A += c
        displayed.append(Fraction(tau_prod, 1 << A))
        length = cylinder_image(base[:n]).width
        measure = cylinder_measure(taus)
        lengths.append(length)
        measures.append(measure)
        raw.append(length / measure)
    return CylinderDerivative(displayed, raw, lengths, measures)


# --------------------------------------------------------------------------
# Order structure: witnesses and continuity bounds
# --------------------------------------------------------------------------


class Direction(str, enum.Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"


@dataclass(frozen=True)
class WitnessPair:
    x_lo: DigitSpec
    x_hi: DigitSpec
    p: int
    direction: Direction
    x_values: tuple[Fraction, Fraction] = field(default=(Fraction(0), Fraction(0)))
    q_values: tuple[Fraction, Fraction] = field(default=(Fraction(0), Fraction(0)))

    def to_json(self) -> dict:
        return {
            "x_lo": format_spec(self.x_lo),
            "x_hi": format_spec(self.x_hi),
            "p": self.p,
            "direction": self.direction.value,
            "x_values": [format_rational(v) for v in self.x_values],
            "qmark_values": [format_rational(v) for v in self.q_values],
        }


def _witness(base: tuple[int, ...], p: int) -> WitnessPair:
    fill = (1,) * (p - 1 - len(base))
    lo = DigitSpec(Alphabet.A, base + fill + (2,), (1,)).canonical()
    hi = DigitSpec(Alphabet.A, base + fill, (1,)).canonical()
    x = (engel_decode(lo).lo, engel_decode(hi).lo)
    q = (qmark_exact(lo), qmark_exact(hi))
    if not x[0] < x[1]:
        raise AssertionError(f"witness points out of order: {x}")
    if q[0] < q[1]:
        direction = Direction.INCREASING
    elif q[0] > q[1]:
        direction = Direction.DECREASING
    else:
        raise AssertionError("witness values coincide")
    return WitnessPair(lo, hi, p, direction, x, q)


def monotonicity_witnesses(base: Sequence[int] = ()) -> tuple[WitnessPair, WitnessPair]:
    """An increasing and a decreasing pair of points inside the a-cylinder ``base``.

    Both points extend the base with ones up to position ``p``, put 2 versus
    1 there, and continue with ones.  An odd ``p`` yields the increasing
    pair, an even ``p`` the decreasing one.  Each pair is checked exactly.
    """
    base = tuple(int(c) for c in base)
    if any(c < 1 for c in base):
        raise InvalidArgument("a-digits must be >= 1")
    n = len(base)
    p_odd = n + 1 if (n + 1) % 2 else n + 2
    p_even = n + 1 if (n + 1) % 2 == 0 else n + 2
    inc, dec = _witness(base, p_odd), _witness(base, p_even)
    if inc.direction is not Direction.INCREASING or dec.direction is not Direction.DECREASING:
        raise AssertionError(f"parity law violated in cylinder {list(base)}")
    return inc, dec


def first_difference(x1: DigitSpec, x2: DigitSpec) -> int | None:
    """1-based position of the first differing a-digit, ``None`` if there is none.

    For two periodic specs, equality over ``pre1 + pre2 + L1*L2`` digits
    means equality everywhere.  A finite spec that is a prefix of the other
    spec also gives ``None``.
    """
    x1, x2 = _as_a(x1), _as_a(x2)
    if x1.is_rule or x2.is_rule:
        raise Unsupported("first_difference needs finite or periodic specs")

    def horizon(s):
        return len(s.preperiod) + (len(s.period) if s.period else 0)

    limit = horizon(x1) + horizon(x2) + (len(x1.period or ()) or 1) * (len(x2.period or ()) or 1) + 1
    for k, (d1, d2) in enumerate(zip(itertools.islice(x1.digits(), limit), x2.digits()), start=1):
        if d1 != d2:
            return k
    return None


@dataclass(frozen=True)
class ContinuityCheck:
    p: int
    value1: Fraction
    value2: Fraction
    difference: Fraction
    digit_sum_bound: Fraction
    holds: bool
    slack: Fraction
    parity_bound: Fraction
    parity_bound_holds: bool

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "value1": format_rational(self.value1),
            "value2": format_rational(self.value2),
            "difference": format_rational(self.difference),
            "digit_sum_bound": format_rational(self.digit_sum_bound),
            "holds": self.holds,
            "slack": format_rational(self.slack),
            "parity_bound": format_rational(self.parity_bound),
            "parity_bound_holds": self.parity_bound_holds,
        }


def continuity_bound_check(x1: DigitSpec, x2: DigitSpec) -> ContinuityCheck:
    """Compare ``|?EM(x2) - ?EM(x1)|`` with the bound from the common prefix.

    With the first difference at position ``p`` the bound is
    ``2^(1 - a1 - ... - a(p-1) - min(a_p(x1), a_p(x2)))``.  The weaker
    ``2^-(p+1)`` comparison is reported alongside but does not always hold.
    """
    x1, x2 = _as_a(x1), _as_a(x2)
    p = first_difference(x1, x2)
    if p is None:
        raise InvalidArgument("specs agree on every digit (or one is a prefix of the other)")
    d1, d2 = x1.prefix(p), x2.prefix(p)
    exponent = 1 - sum(d1[:-1]) - min(d1[-1], d2[-1])
    bound = Fraction(2) ** exponent
    v1, v2 = qmark_exact(x1), qmark_exact(x2)
    diff = abs(v2 - v1)
    parity = Fraction(1, 1 << (p + 1))
    return ContinuityCheck(p, v1, v2, diff, bound, diff < bound, bound - diff, parity, diff < parity)


def compare_points(x1: DigitSpec, x2: DigitSpec, max_depth: int = 10_000) -> int:
    """``sign(x2 - x1)`` from nested decoding enclosures (no digit-order reasoning)."""
    q1, q2 = a_to_q(_as_a(x1)), a_to_q(_as_a(x2))
    exact1 = q1.is_finite or q1.is_periodic
    exact2 = q2.is_finite or q2.is_periodic
    if exact1 and exact2:
        v1, v2 = engel_decode(q1).lo, engel_decode(q2).lo
        return (v2 > v1) - (v2 < v1)
    for depth in itertools.chain(range(1, 64), range(64, max_depth, 64)):
        i1, i2 = engel_decode(q1, depth), engel_decode(q2, depth)
        # cylinders are half-open [lo, hi): disjoint when one ends where the other starts
        if i1.hi <= i2.lo:
            return 1
        if i2.hi <= i1.lo:
            return -1
    raise RuntimeError("points not separated within max_depth")


# --------------------------------------------------------------------------
# Graph data
# --------------------------------------------------------------------------


def plot_rows(samples: int, depth: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    """``(x, lo, hi)`` on the grid ``x = i/samples``, ``i = 1..samples``.

    Grid points are rational, so each has two Engel expansions; the
    canonical infinite one is used (the finite one gives the value of the
    right-hand limit instead).
    """
    from .digits import EncodeMode, engel_encode, q_to_a

    if samples < 2:
        raise InvalidArgument("need at least 2 samples")
    rows = []
    for i in range(1, samples + 1):
        x = Fraction(i, samples)
        spec = q_to_a(engel_encode(x, EncodeMode.CANONICAL))
        iv = qmark_eval(spec, depth).enclosure()
        rows.append((x, iv.lo, iv.hi))
    return rows


def plot_csv(samples: int, depth: int) -> str:
    lines = ["x,lo,hi,x_decimal,lo_decimal,hi_decimal"]
    for x, lo, hi in plot_rows(samples, depth):
        lines.append(",".join([format_rational(x), format_rational(lo), format_rational(hi),
                               repr(float(x)), repr(float(lo)), repr(float(hi))]))
    return "\n".join(lines) + "\n"
