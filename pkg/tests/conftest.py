from fractions import Fraction

from hypothesis import strategies as st

from engel_minkowski.digits import Alphabet, DigitSpec


@st.composite
def unit_rationals(draw, max_den=10**6):
    d = draw(st.integers(1, max_den))
    n = draw(st.integers(1, d))
    return Fraction(n, d)


@st.composite
def periodic_a_specs(draw, max_digit=8, max_pre=5, max_period=5):
    pre = draw(st.lists(st.integers(1, max_digit), max_size=max_pre))
    period = draw(st.lists(st.integers(1, max_digit), min_size=1, max_size=max_period))
    return DigitSpec(Alphabet.A, tuple(pre), tuple(period))


@st.composite
def finite_a_specs(draw, max_digit=8, max_len=8):
    return DigitSpec(Alphabet.A, tuple(draw(st.lists(st.integers(1, max_digit), min_size=1,
                                                     max_size=max_len))))


def q_bases(max_len=6, max_digit=30):
    """Non-decreasing q-digit lists starting at 2 or more."""
    return st.lists(st.integers(2, max_digit), min_size=1, max_size=max_len).map(sorted)


def brute_engel_digits(x, limit=200):
    """Greedy Engel digits using nothing but Fraction arithmetic and floor."""
    out = []
    while x != 0 and len(out) < limit:
        inv = 1 / x
        q = inv.numerator // inv.denominator
        if inv == q:
            out.append(q)
            break
        q += 1
        out.append(q)
        x = q * x - 1
    return out


def brute_qmark_partial(a_digits):
    """Direct sum of sum_k (-1)^(k+1) 2^(1 - a_1 - ... - a_k)."""
    total = Fraction(0)
    for k in range(1, len(a_digits) + 1):
        total += (-1) ** (k + 1) * Fraction(2) ** (1 - sum(a_digits[:k]))
    return total


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
