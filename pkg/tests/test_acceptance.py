"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and shown in pytest's terminal summary.
"""

import contextlib
import math
import random
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES, brute_qmark_partial
from engel_minkowski.digits import (
    Alphabet,
    DigitSpec,
    EncodeMode,
    a_to_q,
    engel_decode,
    engel_encode,
    engel_value,
    is_valid_q_digits,
    parse_spec,
    q_to_a,
)
from engel_minkowski.integrate import (
    alt_integral_value,
    certified_integral,
    monte_carlo_integral,
    paper_integral_value,
    series_S1,
    series_S2,
)
from engel_minkowski.qmark import (
    Direction,
    Trend,
    continuity_bound_check,
    cylinder_derivative,
    derivative_trace,
    first_difference,
    functional_check,
    monotonicity_witnesses,
    qmark_eval,
    qmark_exact,
)

F = Fraction


@contextlib.contextmanager
def criterion(label):
    start = time.perf_counter()
    notes = []
    try:
        yield notes
    except BaseException as exc:
        line = f"FAIL  {label} ({time.perf_counter() - start:.2f}s): {str(exc).splitlines()[0][:160]}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        raise
    extra = f" [{'; '.join(notes)}]" if notes else ""
    line = f"PASS  {label} ({time.perf_counter() - start:.2f}s){extra}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def rand_rational(rng, max_den=10**6):
    d = rng.randint(1, max_den)
    return F(rng.randint(1, d), d)


def rand_a_spec(rng, max_digit=8, max_pre=5, max_period=5):
    pre = tuple(rng.randint(1, max_digit) for _ in range(rng.randint(0, max_pre)))
    period = tuple(rng.randint(1, max_digit) for _ in range(rng.randint(1, max_period)))
    return DigitSpec(Alphabet.A, pre, period)


def x_sign(x1, x2):
    """sign(x2 - x1) by widening depth until the exact brackets separate."""
    q1, q2 = a_to_q(x1), a_to_q(x2)
    for depth in range(1, 400):
        b1, b2 = engel_decode(q1, depth), engel_decode(q2, depth)
        if b1.hi < b2.lo:
            return 1
        if b2.hi < b1.lo:
            return -1
    raise AssertionError(f"could not separate {x1} and {x2}")


def test_c1_codec_roundtrip():
    rng = random.Random(101)
    with criterion("C1 codec roundtrip, 1000 rationals, < 10 s"):
        start = time.perf_counter()
        for _ in range(1000):
            x = rand_rational(rng)
            spec = engel_encode(x, EncodeMode.FINITE)
            assert is_valid_q_digits(spec.preperiod), f"bad digits for {x}"
            v = engel_decode(spec)
            assert v.lo == v.hi == x, f"roundtrip failed for {x}"
        elapsed = time.perf_counter() - start
        assert elapsed < 10, f"took {elapsed:.1f}s"


def test_c2_known_values():
    with criterion("C2 known values at 1, 1/2, e-2"):
        one = qmark_exact(engel_encode(F(1), EncodeMode.CANONICAL))
        half = qmark_exact(engel_encode(F(1, 2), EncodeMode.CANONICAL))
        e2 = qmark_exact(parse_spec("a:[1,(2)]"))
        assert (one, half, e2) == (F(2, 3), F(1, 3), F(4, 5)), (one, half, e2)
        # q_k = k + 1 is the Engel expansion of e - 2
        assert q_to_a(parse_spec("q:rule=k+1")).prefix(40) == parse_spec("a:[1,(2)]").prefix(40)


def test_c3_functional_identity():
    rng = random.Random(103)
    with criterion("C3 functional identity, 100 specs, n <= 20, < 5 s"):
        start = time.perf_counter()
        for _ in range(100):
            spec = rand_a_spec(rng)
            for n in range(1, 21):
                r = functional_check(spec, n)
                assert r == 0, f"residual {r} for {spec}, n={n}"
        elapsed = time.perf_counter() - start
        assert elapsed < 5, f"took {elapsed:.1f}s"


def test_c4_nowhere_monotone():
    rng = random.Random(104)
    with criterion("C4 witnesses on 1000 cylinders, order law on 10000 pairs, < 30 s") as notes:
        start = time.perf_counter()
        for _ in range(1000):
            base = tuple(rng.randint(1, 8) for _ in range(rng.randint(0, 6)))
            inc, dec = monotonicity_witnesses(base)
            for pair, direction in ((inc, Direction.INCREASING), (dec, Direction.DECREASING)):
                assert tuple(pair.x_lo.prefix(len(base))) == base == tuple(pair.x_hi.prefix(len(base)))
                x_lo, x_hi = engel_value(pair.x_lo), engel_value(pair.x_hi)
                y_lo, y_hi = qmark_exact(pair.x_lo), qmark_exact(pair.x_hi)
                assert x_lo < x_hi
                assert (y_lo < y_hi) == (direction is Direction.INCREASING) and y_lo != y_hi
        pairs = 0
        while pairs < 10_000:
            x1, x2 = rand_a_spec(rng), rand_a_spec(rng)
            p = first_difference(x1, x2)
            if p is None:
                continue
            pairs += 1
            sx = x_sign(x1, x2)
            dy = qmark_exact(x2) - qmark_exact(x1)
            sy = (dy > 0) - (dy < 0)
            assert sy == (-1) ** (p + 1) * sx, f"order law fails: {x1} {x2}"
        elapsed = time.perf_counter() - start
        notes.append(f"{pairs} pairs")
        assert elapsed < 30, f"took {elapsed:.1f}s"


def test_c5_enclosures_and_continuity():
    rng = random.Random(105)
    with criterion("C5 enclosures nested, exact width, digit-sum bound") as notes:
        for _ in range(1000):
            spec = rand_a_spec(rng)
            exact = qmark_exact(spec)
            digits = spec.prefix(20)
            prev = None
            for depth in range(1, 21):
                value = qmark_eval(spec, depth)
                iv = value.enclosure()
                assert value.partial == brute_qmark_partial(digits[:depth])
                assert iv.width == F(1, 2 ** sum(digits[:depth])), f"{spec} depth {depth}"
                assert iv.contains(exact)
                if prev is not None:
                    assert prev.contains_interval(iv)
                prev = iv
        checked = parity_fails = 0
        for _ in range(1000):
            x1, x2 = rand_a_spec(rng), rand_a_spec(rng)
            if first_difference(x1, x2) is None:
                continue
            check = continuity_bound_check(x1, x2)
            assert check.holds, f"digit-sum bound fails for {x1}, {x2}"
            checked += 1
            parity_fails += not check.parity_bound_holds
        c = continuity_bound_check(q_to_a(engel_encode(F(1), EncodeMode.CANONICAL)),
                                   q_to_a(engel_encode(F(1, 2), EncodeMode.CANONICAL)))
        assert (c.p, c.value1, c.value2) == (1, F(2, 3), F(1, 3)) and not c.parity_bound_holds
        notes.append(f"digit-sum bound held on {checked} pairs")
        notes.append(f"chained 2^-(p+1) bound failed on {parity_fails}; recorded p=1: |2/3-1/3| = 1/3 >= 1/4")


def test_c6a_derivative_trace_classes():
    with criterion("C6a derivative traces classify within depth 50"):
        cases = {"a:[(2)]": Trend.TENDS_TO_INFINITY, "a:rule=k+1": Trend.TENDS_TO_ZERO,
                 "a:[(1)]": Trend.UNIT_CONSTANT}
        for text, expected in cases.items():
            got = derivative_trace(parse_spec(text), 50).classification
            assert got is expected, f"{text}: {got}"


def test_c6b_cylinder_quotients_within_factor_two():
    rng = random.Random(106)
    with criterion("C6b cylinder quotients agree within factor [1, 2) on 500 bases") as notes:
        bad = []
        for _ in range(500):
            base = tuple(rng.randint(1, 8) for _ in range(rng.randint(1, 6)))
            d = cylinder_derivative(base)
            for n, (shown, raw) in enumerate(zip(d.displayed, d.raw), start=1):
                factor = raw / shown
                if not F(1) <= factor < 2:
                    bad.append((base[:n], factor))
        assert not bad, (f"{len(bad)} prefixes outside [1, 2); first {list(bad[0][0])} "
                         f"has factor {bad[0][1]}")


def test_c7_series_constants():
    with criterion("C7 series constants and candidate integral values"):
        ln2 = math.log(2)
        assert abs(series_S1(1e-12) - (1 - ln2)) <= 1e-11
        assert abs(series_S2(1e-12) - (2 - ln2 - math.pi ** 2 / 6 + ln2 ** 2)) <= 1e-11
        assert round(paper_integral_value(), 4) == 0.5372
        assert round(alt_integral_value(), 4) == 0.4777


def test_c8_certified_integral():
    with criterion("C8 certified integral width <= 1e-4 in 1e6 nodes, MC consistent") as notes:
        history = []
        start = time.perf_counter()
        report = certified_integral(F(1, 10**4), node_budget=10**6, history=history)
        elapsed = time.perf_counter() - start
        assert not report.budget_exhausted and report.node_evaluations <= 10**6
        assert report.width <= F(1, 10**4)
        assert report.monotone
        assert all(a[0] <= b[0] and b[1] <= a[1] for a, b in zip(history, history[1:]))
        assert elapsed < 300
        report.mc = monte_carlo_integral(10**5, seed=42)
        # a 1e5-sample mean has standard error ~1e-3, so agreement is judged at 99% confidence
        assert report.mc_consistent, f"MC {report.mc.mean} outside [{report.lower}, {report.upper}]"
        point_inside = report.lower <= F(report.mc.mean) <= report.upper
        assert report.paper_contained == (report.lower <= F(report.paper_value) <= report.upper)
        assert report.alt_contained == (report.lower <= F(report.alt_value) <= report.upper)
        assert not (report.paper_contained and report.alt_contained)
        notes.append(f"[{float(report.lower):.6f}, {float(report.upper):.6f}]")
        notes.append(f"{report.node_evaluations} nodes")
        notes.append(f"MC {report.mc.mean:.5f} +- {report.mc.half_width:.5f}, point inside: {point_inside}")
        notes.append(f"contains 0.5372: {report.paper_contained}, contains 0.4777: {report.alt_contained}")
