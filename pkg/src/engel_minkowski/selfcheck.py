"""Batch self-checks over every module, used by ``engel-minkowski selfcheck``."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .digits import (
    Alphabet,
    DigitSpec,
    EncodeMode,
    a_to_q,
    engel_decode,
    engel_encode,
    is_valid_q_digits,
    q_to_a,
)
from .integrate import (
    S1_closed_form,
    S2_closed_form,
    certified_integral,
    monte_carlo_integral,
    series_S1,
    series_S2,
)
from .qmark import (
    compare_points,
    continuity_bound_check,
    first_difference,
    functional_check,
    monotonicity_witnesses,
    qmark_eval,
    qmark_exact,
    qmark_inverse,
)

SEED = 1234
SIZES = {"fast": 1, "full": 10}


def random_rational(rng: random.Random, max_den: int = 10**6) -> Fraction:
    d = rng.randint(1, max_den)
    return Fraction(rng.randint(1, d), d)


def random_a_spec(rng: random.Random, max_digit: int = 8, max_pre: int = 5,
                  max_period: int = 5) -> DigitSpec:
    pre = [rng.randint(1, max_digit) for _ in range(rng.randint(0, max_pre))]
    period = [rng.randint(1, max_digit) for _ in range(rng.randint(1, max_period))]
    return DigitSpec(Alphabet.A, tuple(pre), tuple(period))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _codec_roundtrip(rng, scale, inject):
    for _ in range(100 * scale):
        x = random_rational(rng)
        for mode in EncodeMode:
            v = engel_decode(engel_encode(x, mode))
            assert v.lo == v.hi == x, f"decode(encode({x}, {mode.value})) = {v}"


def _q_monotonicity(rng, scale, inject):
    batches = [engel_encode(random_rational(rng)).preperiod for _ in range(100 * scale)]
    if inject == "q-monotonicity":
        batches.append((3, 2))
    for digits in batches:
        assert is_valid_q_digits(digits), f"digits {list(digits)} violate 2 <= q_k <= q_(k+1)"


def _bracket_nesting(rng, scale, inject):
    for _ in range(20 * scale):
        spec = a_to_q(random_a_spec(rng))
        exact = engel_decode(spec).lo if not spec.is_rule else None
        prev = None
        for depth in range(1, 15):
            iv = engel_decode(spec, depth)
            if prev is not None:
                assert prev.contains_interval(iv), f"{spec} not nested at depth {depth}"
            if exact is not None:
                assert iv.contains(exact), f"{spec} bracket misses value at depth {depth}"
            prev = iv


def _bijection(rng, scale, inject):
    for _ in range(50 * scale):
        a = random_a_spec(rng)
        assert q_to_a(a_to_q(a)) == a.canonical(), f"q/a roundtrip failed for {a}"
        q = engel_encode(random_rational(rng), EncodeMode.CANONICAL)
        assert a_to_q(q_to_a(q)) == q.canonical(), f"a/q roundtrip failed for {q}"


def _known_values(rng, scale, inject):
    one = q_to_a(engel_encode(Fraction(1), EncodeMode.CANONICAL))
    half = q_to_a(engel_encode(Fraction(1, 2), EncodeMode.CANONICAL))
    e2 = DigitSpec(Alphabet.A, (1,), (2,))
    assert qmark_exact(one) == Fraction(2, 3)
    assert qmark_exact(half) == Fraction(1, 3)
    assert qmark_exact(e2) == Fraction(4, 5)


def _functional(rng, scale, inject):
    for _ in range(10 * scale):
        spec = random_a_spec(rng)
        for n in range(1, 21):
            assert functional_check(spec, n) == 0, f"residual nonzero for {spec}, n={n}"


def _inverse(rng, scale, inject):
    for _ in range(20 * scale):
        spec = random_a_spec(rng)
        assert qmark_inverse(qmark_exact(spec)) == spec.canonical(), f"inverse failed for {spec}"


def _witness_parity(rng, scale, inject):
    for _ in range(50 * scale):
        base = tuple(rng.randint(1, 8) for _ in range(rng.randint(0, 6)))
        inc, dec = monotonicity_witnesses(base)
        assert inc.p % 2 == 1 and dec.p % 2 == 0


def _order_law(rng, scale, inject):
    for _ in range(100 * scale):
        x1, x2 = random_a_spec(rng), random_a_spec(rng)
        p = first_difference(x1, x2)
        if p is None:
            continue
        dq = qmark_exact(x2) - qmark_exact(x1)
        sign_q = (dq > 0) - (dq < 0)
        assert sign_q == (-1) ** (p + 1) * compare_points(x1, x2), f"order law fails: {x1} {x2}"


def _enclosures(rng, scale, inject):
    for _ in range(30 * scale):
        spec = random_a_spec(rng)
        exact = qmark_exact(spec)
        prev = None
        for depth in range(1, 21):
            iv = qmark_eval(spec, depth).enclosure()
            assert iv.contains(exact), f"enclosure of {spec} misses value at depth {depth}"
            if prev is not None:
                assert prev.contains_interval(iv)
            prev = iv


def _continuity(rng, scale, inject):
    for _ in range(100 * scale):
        x1, x2 = random_a_spec(rng), random_a_spec(rng)
        if first_difference(x1, x2) is None:
            continue
        assert continuity_bound_check(x1, x2).holds, f"digit-sum bound fails: {x1} {x2}"


def _series(rng, scale, inject):
    assert abs(series_S1(1e-12) - S1_closed_form()) <= 1e-11
    assert abs(series_S2(1e-12) - S2_closed_form()) <= 1e-11


def _integral(rng, scale, inject):
    report = certified_integral(Fraction(1, 1000))
    assert report.width <= Fraction(1, 1000) and report.monotone
    mc = monte_carlo_integral(10_000, seed=SEED)
    report.mc = mc
    assert report.mc_consistent, "Monte Carlo estimate outside certified bounds"


CHECKS: list[tuple[str, Callable, set[str]]] = [
    ("codec-roundtrip", _codec_roundtrip, {"fast", "full"}),
    ("q-monotonicity", _q_monotonicity, {"fast", "full"}),
    ("bracket-nesting", _bracket_nesting, {"fast", "full"}),
    ("qa-bijection", _bijection, {"fast", "full"}),
    ("known-values", _known_values, {"fast", "full"}),
    ("functional-equation", _functional, {"fast", "full"}),
    ("qmark-inverse", _inverse, {"fast", "full"}),
    ("witness-parity", _witness_parity, {"fast", "full"}),
    ("order-law", _order_law, {"fast", "full"}),
    ("enclosure-nesting", _enclosures, {"fast", "full"}),
    ("continuity-bound", _continuity, {"fast", "full"}),
    ("series-constants", _series, {"fast", "full"}),
    ("integral-bracketing", _integral, {"full"}),
]


def run_selfcheck(level: str = "fast", inject: str | None = None,
                  seed: int = SEED) -> list[CheckResult]:
    """Run every check registered for ``level``.

    ``inject`` names a check whose input batch gets a deliberately invalid
    item, to confirm that failures are reported.
    """
    if level not in SIZES:
        raise ValueError(f"unknown level {level!r}")
    results = []
    for name, fn, levels in CHECKS:
        if level not in levels:
            continue
        rng = random.Random(f"{seed}:{name}")
        start = time.perf_counter()
        try:
            fn(rng, SIZES[level], inject)
        except AssertionError as exc:
            results.append(CheckResult(name, False, str(exc), time.perf_counter() - start))
        else:
            results.append(CheckResult(name, True, "ok", time.perf_counter() - start))
    return results
