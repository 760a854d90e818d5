"""Engel digit sequences in the classical q-alphabet and the free a-alphabet.

A point ``x`` of (0, 1] has the Engel expansion

    x = 1/q1 + 1/(q1 q2) + 1/(q1 q2 q3) + ...,    2 <= q1 <= q2 <= ...

The a-digits are the increments ``a1 = q1 - 1`` and ``ak = qk - q(k-1) + 1``,
so that ``qk = 2 + a1 + ... + ak - k``.  Any sequence of positive integers is
a valid a-sequence, which is what makes that alphabet convenient for the
question-mark function.

Digit specs come in three shapes: finite lists, eventually periodic lists and
rule-streamed sequences.  The text form is ``q:[2,3,4,7]``, ``a:[1,(2)]``
(parentheses mark the repeating block) and ``a:rule=k+1``.
"""

from __future__ import annotations

import ast
import enum
import itertools
import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterator, Sequence

from .errors import InvalidArgument, OutOfDomain, Unsupported
from .numerics import RatInterval


class Alphabet(str, enum.Enum):
    Q = "q"
    A = "a"


class EncodeMode(str, enum.Enum):
    FINITE = "finite"
    CANONICAL = "canonical"


# --------------------------------------------------------------------------
# Digit rules
# --------------------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: operator.pow,
}


def _compile_expression(text: str) -> Callable[[int], int]:
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise InvalidArgument(f"bad rule expression {text!r}") from exc

    def build(node) -> Callable[[int], int]:
        if isinstance(node, ast.Constant) and type(node.value) is int:
            value = node.value
            return lambda k: value
        if isinstance(node, ast.Name) and node.id == "k":
            return lambda k: k
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda k: -inner(k)
            return inner
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left, right = build(node.left), build(node.right)
            return lambda k: op(left(k), right(k))
        raise InvalidArgument(f"unsupported construct in rule {text!r}")

    return build(tree)


@dataclass(frozen=True)
class Rule:
    """A digit generator identified by its text.

    ``text`` is an integer expression in the 1-based index ``k`` (``k+1``,
    ``2*k``), or ``tau(X)`` / ``delta(X)`` wrapping an a-body or q-body ``X``.
    ``tau`` turns a-digits into q-digits and ``delta`` does the reverse, so
    alphabet conversion of a rule never loses information.
    """

    text: str

    def __post_init__(self):
        self._source()  # validates eagerly

    def _source(self):
        t = self.text
        for head, alphabet in (("tau(", Alphabet.A), ("delta(", Alphabet.Q)):
            if t.startswith(head) and t.endswith(")"):
                return head[:-1], parse_body(alphabet, t[len(head):-1])
        return "expr", _compile_expression(t)

    def digits(self) -> Iterator[int]:
        kind, src = self._source()
        if kind == "expr":
            return (src(k) for k in itertools.count(1))
        if kind == "tau":
            return _tau_stream(src.digits())
        return _delta_stream(src.digits())


def _tau_stream(a_digits) -> Iterator[int]:
    q = 2
    for a in a_digits:
        q += a - 1
        yield q


def _delta_stream(q_digits) -> Iterator[int]:
    prev = 2
    for q in q_digits:
        yield q - prev + 1
        prev = q


# --------------------------------------------------------------------------
# Digit specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DigitSpec:
    """Digit sequence in one alphabet.

    Exactly one shape is populated: finite (``period is None`` and no rule),
    eventually periodic (``period`` set) or streamed (``rule`` set, with empty
    preperiod).  Finite and periodic specs are validated on construction;
    rule digits are validated lazily as they are produced.
    """

    alphabet: Alphabet
    preperiod: tuple[int, ...] = ()
    period: tuple[int, ...] | None = None
    rule: Rule | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        object.__setattr__(self, "preperiod", tuple(int(d) for d in self.preperiod))
        if self.period is not None:
            object.__setattr__(self, "period", tuple(int(d) for d in self.period))
            if not self.period:
                raise InvalidArgument("period must be nonempty")
        if self.rule is not None:
            if self.preperiod or self.period is not None:
                raise InvalidArgument("rule specs carry no explicit digits")
            return
        if self.alphabet is Alphabet.A:
            if any(d < 1 for d in self.preperiod + (self.period or ())):
                raise InvalidArgument("a-digits must be >= 1")
        else:
            seq = self.preperiod + (self.period or ())
            if self.period is not None:
                seq += self.period[:1]
            _check_q_digits(seq)

    # constructors -------------------------------------------------------

    @classmethod
    def finite(cls, alphabet, digits: Sequence[int]) -> DigitSpec:
        return cls(alphabet, tuple(digits))

    @classmethod
    def periodic(cls, alphabet, preperiod: Sequence[int], period: Sequence[int]) -> DigitSpec:
        return cls(alphabet, tuple(preperiod), tuple(period))

    @classmethod
    def from_rule(cls, alphabet, text: str) -> DigitSpec:
        return cls(alphabet, rule=Rule(text))

    # shape --------------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.period is None and self.rule is None

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    @property
    def is_rule(self) -> bool:
        return self.rule is not None

    @property
    def length(self) -> int | None:
        """Number of digits of a finite spec, ``None`` otherwise."""
        return len(self.preperiod) if self.is_finite else None

    # digit access -------------------------------------------------------

    def digits(self) -> Iterator[int]:
        """Iterate the digits; infinite unless the spec is finite."""
        if self.is_finite:
            return iter(self.preperiod)
        if self.is_periodic:
            return itertools.chain(self.preperiod, itertools.cycle(self.period))
        return self._checked_rule_digits()

    def _checked_rule_digits(self) -> Iterator[int]:
        prev = 2
        for k, d in enumerate(self.rule.digits(), start=1):
            if self.alphabet is Alphabet.A:
                if d < 1:
                    raise InvalidArgument(f"rule {self.rule.text!r} gives a-digit {d} at k={k}")
            elif d < prev:
                raise InvalidArgument(
                    f"rule {self.rule.text!r} violates 2 <= q_k <= q_(k+1) at k={k}")
            prev = d
            yield d

    def prefix(self, n: int) -> list[int]:
        """The first ``n`` digits (fewer if the spec is finite and shorter)."""
        return list(itertools.islice(self.digits(), n))

    def digit(self, k: int) -> int:
        """The ``k``-th digit, 1-based."""
        if k < 1:
            raise InvalidArgument("digit index is 1-based")
        d = self.prefix(k)
        if len(d) < k:
            raise InvalidArgument(f"finite spec has only {len(d)} digits")
        return d[-1]

    def drop(self, n: int = 1) -> DigitSpec:
        """Remove the first ``n`` digits, keeping the spec's shape."""
        if n < 0:
            raise InvalidArgument("negative drop")
        if n == 0:
            return self
        if self.is_finite:
            if n > len(self.preperiod):
                raise InvalidArgument("cannot drop past the end of a finite spec")
            return DigitSpec(self.alphabet, self.preperiod[n:])
        if self.is_periodic:
            m = len(self.preperiod)
            if n <= m:
                return DigitSpec(self.alphabet, self.preperiod[n:], self.period)
            r = (n - m) % len(self.period)
            return DigitSpec(self.alphabet, (), self.period[r:] + self.period[:r])
        return _drop_rule(self, n)

    def canonical(self) -> DigitSpec:
        """Shortest period and preperiod; finite and rule specs are returned as-is."""
        if not self.is_periodic:
            return self
        period = _minimal_period(self.period)
        pre = list(self.preperiod)
        while pre and pre[-1] == period[-1]:
            pre.pop()
            period = (period[-1],) + period[:-1]
        return DigitSpec(self.alphabet, tuple(pre), period)

    def __str__(self) -> str:
        return format_spec(self)


def _drop_rule(spec: DigitSpec, n: int) -> DigitSpec:
    text = spec.rule.text
    kind, _ = spec.rule._source()
    if kind == "expr":
        shifted = ast.unparse(_substitute_k(ast.parse(text, mode="eval").body, n))
        return DigitSpec(spec.alphabet, rule=Rule(shifted))
    raise Unsupported(f"cannot shift derived rule {text!r}; shift in its source alphabet")


def _substitute_k(node, n):
    class Sub(ast.NodeTransformer):
        def visit_Name(self, name):
            if name.id == "k":
                return ast.BinOp(ast.Name("k", ast.Load()), ast.Add(), ast.Constant(n))
            return name

    return Sub().visit(node)


def _minimal_period(period: tuple[int, ...]) -> tuple[int, ...]:
    L = len(period)
    for d in range(1, L + 1):
        if L % d == 0 and period == period[:d] * (L // d):
            return period[:d]
    return period


def _check_q_digits(seq: Sequence[int]) -> None:
    prev = 2
    for d in seq:
        if d < prev:
            raise InvalidArgument(f"q-digits must satisfy 2 <= q_k <= q_(k+1): {list(seq)}")
        prev = d


def is_valid_q_digits(seq: Sequence[int]) -> bool:
    try:
        _check_q_digits(seq)
    except InvalidArgument:
        return False
    return True


# --------------------------------------------------------------------------
# Text format
# --------------------------------------------------------------------------

_LIST_RE = re.compile(r"^\[\s*([\d\s,]*?)\s*(?:,?\s*\(\s*([\d\s,]+)\s*\))?\s*\]$")


def _int_list(text: str) -> tuple[int, ...]:
    text = text.strip().strip(",")
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise InvalidArgument(f"bad digit list {text!r}") from exc


def parse_body(alphabet, body: str) -> DigitSpec:
    body = body.strip()
    if body.startswith("rule="):
        return DigitSpec(alphabet, rule=Rule(body[len("rule="):].strip()))
    m = _LIST_RE.match(body)
    if m is None:
        raise InvalidArgument(f"bad digit spec body {body!r}")
    pre = _int_list(m.group(1))
    period = _int_list(m.group(2)) if m.group(2) is not None else None
    return DigitSpec(alphabet, pre, period)


def parse_spec(text: str) -> DigitSpec:
    """Parse ``q:[...]``, ``a:[...]`` or ``a:rule=...``."""
    head, sep, body = text.strip().partition(":")
    if not sep or head.strip().lower() not in ("q", "a"):
        raise InvalidArgument(f"digit spec must start with 'q:' or 'a:': {text!r}")
    return parse_body(Alphabet(head.strip().lower()), body)


def format_body(spec: DigitSpec) -> str:
    if spec.is_rule:
        return f"rule={spec.rule.text}"
    parts = [str(d) for d in spec.preperiod]
    if spec.period is not None:
        parts.append("(" + ",".join(str(d) for d in spec.period) + ")")
    return "[" + ",".join(parts) + "]"


def format_spec(spec: DigitSpec) -> str:
    return f"{spec.alphabet.value}:{format_body(spec)}"


# --------------------------------------------------------------------------
# Encoding and decoding
# --------------------------------------------------------------------------


def _check_unit(x: Fraction) -> Fraction:
    x = Fraction(x)
    if not 0 < x <= 1:
        raise OutOfDomain(f"{x} is not in (0, 1]")
    return x


def greedy_digits(x: Fraction, mode: EncodeMode = EncodeMode.FINITE) -> Iterator[int]:
    """Stream the Engel q-digits of ``x``.

    The remainder keeps the denominator of ``x``: with ``x = p/d`` the next
    remainder is ``(q*p - d)/d``, so only integers are touched.  In finite
    mode the stream stops when ``1/x_k`` is an integer ``m`` (emitting ``m``);
    in canonical mode it continues forever with ``m + 1``.  ``x = 1`` has
    no finite expansion and yields ``2, 2, 2, ...`` in both modes.
    """
    x = _check_unit(x)
    p, d = x.numerator, x.denominator
    mode = EncodeMode(mode)
    if p == d:
        yield from itertools.repeat(2)
        return
    while True:
        m, r = divmod(d, p)
        if r == 0:
            if mode is EncodeMode.FINITE:
                yield m
                return
            yield from itertools.repeat(m + 1)
            return
        q = m + 1
        yield q
        p = q * p - d


def engel_encode(x: Fraction, mode: EncodeMode = EncodeMode.FINITE) -> DigitSpec:
    """Engel q-digits of a rational in (0, 1] as a finite or periodic spec."""
    x = _check_unit(x)
    mode = EncodeMode(mode)
    if x == 1:
        return DigitSpec(Alphabet.Q, (), (2,))
    p, d = x.numerator, x.denominator
    digits = []
    while True:
        m, r = divmod(d, p)
        if r == 0:
            if mode is EncodeMode.FINITE:
                digits.append(m)
                return DigitSpec(Alphabet.Q, tuple(digits))
            return DigitSpec(Alphabet.Q, tuple(digits), (m + 1,))
        q = m + 1
        digits.append(q)
        p = q * p - d


def _as_q(spec: DigitSpec) -> DigitSpec:
    return spec if spec.alphabet is Alphabet.Q else a_to_q(spec)


def _as_a(spec: DigitSpec) -> DigitSpec:
    return spec if spec.alphabet is Alphabet.A else q_to_a(spec)


def bracket(digits: Sequence[int]) -> RatInterval:
    """Interval of all points whose Engel expansion starts with ``digits``.

    The left end is the finite expansion itself and the right end (excluded
    from the cylinder, included here) is the left end with the last digit's
    contribution ``1/(q1...qn)`` replaced by ``1/(q1...q(n-1)(qn - 1))``.
    """
    if not digits:
        return RatInterval(0, 1)
    total = Fraction(0)
    prod = 1
    for q in digits[:-1]:
        prod *= q
        total += Fraction(1, prod)
    last = digits[-1]
    return RatInterval(total + Fraction(1, prod * last), total + Fraction(1, prod * (last - 1)))


def engel_value(spec: DigitSpec) -> Fraction:
    """Exact value of a finite or periodic spec (either alphabet)."""
    spec = _as_q(spec)
    if spec.is_rule:
        raise Unsupported("rule specs have no closed-form value; use engel_decode")
    total = Fraction(0)
    prod = 1
    for q in spec.preperiod:
        prod *= q
        total += Fraction(1, prod)
    if spec.period is not None:
        # constant tail c contributes (1/prod) * sum_k c^-k = 1/(prod (c - 1))
        total += Fraction(1, prod * (spec.period[0] - 1))
    return total


def engel_decode(spec: DigitSpec, depth: int | None = None) -> RatInterval:
    """Enclosure of the value of ``spec`` from its first ``depth`` digits.

    With ``depth=None`` the exact value of a finite/periodic spec is returned
    as a degenerate interval; the same happens when ``depth`` reaches past
    the end of a finite spec.
    """
    spec = _as_q(spec)
    if depth is None:
        return RatInterval.point(engel_value(spec))
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    if spec.is_finite and depth >= len(spec.preperiod):
        return RatInterval.point(engel_value(spec))
    return bracket(spec.prefix(depth))


def certify_digits(x: RatInterval, max_digits: int) -> list[int]:
    """Engel digits shared by every point of ``x``, at most ``max_digits`` of them.

    Cylinders are intervals, so the digits common to both endpoints are
    common to everything in between.  Stops at the first ambiguous digit.
    """
    if not 0 < x.lo <= x.hi <= 1:
        raise OutOfDomain(f"interval {x} not inside (0, 1]")
    out = []
    for dl, dh in zip(greedy_digits(x.lo), greedy_digits(x.hi)):
        if dl != dh or len(out) >= max_digits:
            break
        out.append(dl)
    return out


# --------------------------------------------------------------------------
# Alphabet conversion and shifts
# --------------------------------------------------------------------------


def a_to_q(spec: DigitSpec) -> DigitSpec:
    """``qk = 2 + a1 + ... + ak - k``."""
    if spec.alphabet is not Alphabet.A:
        raise InvalidArgument("a_to_q expects an a-spec")
    if spec.is_rule:
        text = spec.rule.text
        if text.startswith("delta(") and text.endswith(")"):
            return parse_body(Alphabet.Q, text[len("delta("):-1])
        return DigitSpec(Alphabet.Q, rule=Rule(f"tau({format_body(spec)})"))
    if spec.is_finite:
        return DigitSpec(Alphabet.Q, tuple(_tau_stream(spec.preperiod)))
    spec = spec.canonical()
    if set(spec.period) != {1}:
        # the q-sequence grows without bound; keep the a-spec as its source
        return DigitSpec(Alphabet.Q, rule=Rule(f"tau({format_body(spec)})"))
    pre = tuple(_tau_stream(spec.preperiod))
    return DigitSpec(Alphabet.Q, pre, (pre[-1] if pre else 2,)).canonical()


def q_to_a(spec: DigitSpec) -> DigitSpec:
    """``a1 = q1 - 1`` and ``ak = qk - q(k-1) + 1``."""
    if spec.alphabet is not Alphabet.Q:
        raise InvalidArgument("q_to_a expects a q-spec")
    if spec.is_rule:
        text = spec.rule.text
        if text.startswith("tau(") and text.endswith(")"):
            return parse_body(Alphabet.A, text[len("tau("):-1])
        return DigitSpec(Alphabet.A, rule=Rule(f"delta({format_body(spec)})"))
    if spec.is_finite:
        return DigitSpec(Alphabet.A, tuple(_delta_stream(spec.preperiod)))
    spec = spec.canonical()
    pre = tuple(_delta_stream(spec.preperiod + spec.period[:1]))
    return DigitSpec(Alphabet.A, pre, (1,)).canonical()


def shift_q(spec: DigitSpec) -> DigitSpec:
    """Drop the first q-digit: the map ``x -> q1*x - 1``.

    An a-spec is accepted and answered in the a-alphabet; there the map
    sends ``(a1, a2, a3, ...)`` to ``(a1 + a2 - 1, a3, ...)``.
    """
    if spec.alphabet is Alphabet.A:
        return q_to_a(shift_q(a_to_q(spec)))
    _require_digit(spec)
    if spec.is_rule:
        text = spec.rule.text
        if text.startswith("tau(") and text.endswith(")"):
            a = parse_body(Alphabet.A, text[len("tau("):-1])
            return a_to_q(_merge_first_a(a))
    return spec.drop(1)


def _merge_first_a(a: DigitSpec) -> DigitSpec:
    head = a.prefix(2)
    if len(head) < 2:
        return DigitSpec(Alphabet.A, ())
    rest = a.drop(2)
    merged = head[0] + head[1] - 1
    if rest.is_rule:
        raise Unsupported("cannot q-shift a rule-streamed a-spec symbolically")
    return DigitSpec(Alphabet.A, (merged,) + rest.preperiod, rest.period)


def shift_a(spec: DigitSpec) -> DigitSpec:
    """Drop the first a-digit; a q-spec is converted, shifted and converted back."""
    if spec.alphabet is Alphabet.Q:
        return a_to_q(shift_a(q_to_a(spec)))
    _require_digit(spec)
    return spec.drop(1)


def _require_digit(spec: DigitSpec) -> None:
    if spec.is_finite and not spec.preperiod:
        raise InvalidArgument("cannot shift an empty spec")


# --------------------------------------------------------------------------
# Cylinders
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Cylinder:
    """Points of (0, 1] whose q-digits start with ``base``: the interval [lo, hi)."""

    base: tuple[int, ...]
    lo: Fraction
    hi: Fraction

    @cached_property
    def measure(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x < self.hi

    def to_json(self) -> dict:
        from .numerics import format_rational

        return {
            "base": list(self.base),
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "measure": format_rational(self.measure),
        }


def cylinder(base: Sequence[int]) -> Cylinder:
    base = tuple(int(c) for c in base)
    if not base:
        raise InvalidArgument("cylinder base must be nonempty")
    _check_q_digits(base)
    iv = bracket(base)
    return Cylinder(base, iv.lo, iv.hi)


def cylinder_measure(base: Sequence[int]) -> Fraction:
    """Closed form ``1/(c1 ... c(n-1) cn (cn - 1))``."""
    prod = 1
    for c in base:
        prod *= c
    return Fraction(1, prod * (base[-1] - 1))
