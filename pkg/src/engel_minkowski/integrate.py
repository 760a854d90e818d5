"""Certified bounds for the integral of ?EM over (0, 1].

The unit interval is partitioned into a-cylinders.  On the cylinder with
base ``c1..cn`` the function equals ``P_n + (-1)^n 2^-A_n ?EM(tail)`` with the
tail value in [0, 1], and the cylinder is the q-cylinder with digits
``tau_1..tau_n`` whose measure is ``1/(tau_1...tau_n (tau_n - 1))``.  Each
leaf therefore contributes an exact rational range ``measure * [lo, hi]``.
Leaves are refined largest-error-first; the infinitely many children of a
node are cut at a threshold ``M`` and the rest is kept as one tail leaf.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

from .digits import EncodeMode, greedy_digits
from .errors import InvalidArgument
from .numerics import format_rational

DEFAULT_SEED = 20240101
DEFAULT_NODE_BUDGET = 1_000_000
Z_99 = 2.5758293035489004


# --------------------------------------------------------------------------
# Series constants and the two candidate closed forms
# --------------------------------------------------------------------------


def _series(power: int, tol: float | None = None, terms: int | None = None):
    """Partial sum of ``sum_a 1/(a (a+1)^power 2^a)`` and a bound on the tail.

    The tail after ``N`` terms is at most ``2^-N / ((N+1)(N+2)^power)``
    (pull out the first denominator, sum the geometric rest).
    """
    total = Fraction(0)
    a = 0
    while True:
        if terms is not None and a >= terms:
            break
        tail = Fraction(1, (a + 1) * (a + 2) ** power * 2 ** a)
        if tol is not None and tail <= tol:
            break
        a += 1
        total += Fraction(1, a * (a + 1) ** power * 2 ** a)
    return total, Fraction(1, (a + 1) * (a + 2) ** power * 2 ** a)


def series_S1(tol: float = 1e-15) -> float:
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    return float(_series(1, tol=Fraction(tol))[0])


def series_S2(tol: float = 1e-15) -> float:
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    return float(_series(2, tol=Fraction(tol))[0])


def series_partial(power: int, terms: int) -> tuple[Fraction, Fraction]:
    """Exact partial sum over ``terms`` terms together with its tail bound."""
    return _series(power, terms=terms)


def S1_closed_form() -> float:
    return 1 - math.log(2)


def S2_closed_form() -> float:
    ln2 = math.log(2)
    return 2 - ln2 - math.pi ** 2 / 6 + ln2 ** 2


def paper_formula(s1: float, s2: float) -> float:
    return 2 * s1 / (1 + s2)


def alt_formula(s1: float, s2: float) -> float:
    """Solution ``I`` of ``I/2 = S1 - S2 * I``."""
    return 2 * s1 / (1 + 2 * s2)


def paper_integral_value(tol: float = 1e-15) -> float:
    return paper_formula(series_S1(tol), series_S2(tol))


def alt_integral_value(tol: float = 1e-15) -> float:
    return alt_formula(series_S1(tol), series_S2(tol))


# --------------------------------------------------------------------------
# Cylinder tree
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderNode:
    """A leaf of the partition.

    ``threshold`` is ``None`` for an exact cylinder; for a tail aggregate it
    is ``M`` and the leaf covers every extension of ``base`` whose next
    digit exceeds ``M``.
    """

    base: tuple[int, ...]
    measure: Fraction
    value_lo: Fraction
    value_hi: Fraction
    threshold: int | None
    # bookkeeping for children
    A: int
    partial: Fraction
    tau: int
    tau_prod: int

    @property
    def kind(self) -> str:
        return "exact" if self.threshold is None else f"tail>{self.threshold}"

    @property
    def error(self) -> Fraction:
        return self.measure * (self.value_hi - self.value_lo)

    def contribution(self) -> tuple[Fraction, Fraction]:
        return self.measure * self.value_lo, self.measure * self.value_hi


def _value_range(n: int, partial: Fraction, radius: Fraction) -> tuple[Fraction, Fraction]:
    if n % 2:
        return partial - radius, partial
    return partial, partial + radius


def root_node() -> CylinderNode:
    return CylinderNode((), Fraction(1), Fraction(0), Fraction(1), None, 0, Fraction(0), 2, 1)


def _exact_child(node: CylinderNode, c: int) -> CylinderNode:
    n = len(node.base)
    tau = node.tau + c - 1
    tau_prod = node.tau_prod * tau
    A = node.A + c
    term = Fraction(2, 1 << A)
    partial = node.partial + term if n % 2 == 0 else node.partial - term
    lo, hi = _value_range(n + 1, partial, Fraction(1, 1 << A))
    return CylinderNode(node.base + (c,), Fraction(1, tau_prod * (tau - 1)), lo, hi, None,
                        A, partial, tau, tau_prod)


def _tail(node: CylinderNode, measure: Fraction, threshold: int) -> CylinderNode:
    lo, hi = _value_range(len(node.base), node.partial, Fraction(1, 1 << (node.A + threshold)))
    return CylinderNode(node.base, measure, lo, hi, threshold, node.A, node.partial,
                        node.tau, node.tau_prod)


def refine(node: CylinderNode, m_init: int) -> list[CylinderNode]:
    """Split a leaf into exact children plus one tail aggregate.

    The branching cut grows with depth (``m_init + rank``) so that tails
    shrink as the tree deepens.  The tail measure is the parent measure
    minus the children, which keeps the partition exact.
    """
    n = len(node.base)
    step = m_init + n
    first = 1 if node.threshold is None else node.threshold + 1
    last = first + step - 1
    children = [_exact_child(node, c) for c in range(first, last + 1)]
    rest = node.measure - sum(ch.measure for ch in children)
    children.append(_tail(node, rest, last))
    return children


def tail_measure_closed_form(node: CylinderNode) -> Fraction:
    """Measure of all extensions of ``node.base`` with next digit > threshold.

    Next q-digits run over ``t >= tau + M``, and ``sum_{t>=T} 1/(t(t-1)) = 1/(T-1)``.
    """
    return Fraction(1, node.tau_prod * (node.tau + node.threshold - 1))


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    half_width: float | None
    enclosure_slack: float
    samples: int
    seed: int
    digit_depth: int

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "half_width_99": self.half_width,
            "enclosure_slack": self.enclosure_slack,
            "samples": self.samples,
            "seed": self.seed,
            "digit_depth": self.digit_depth,
        }


@dataclass
class BoundsReport:
    lower: Fraction
    upper: Fraction
    leaf_count: int
    max_depth: int
    node_evaluations: int
    refinements: int
    budget_exhausted: bool
    monotone: bool
    paper_value: float
    alt_value: float
    mc: MonteCarloEstimate | None = None
    leaves: list[CylinderNode] = field(default_factory=list, repr=False)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def paper_contained(self) -> bool:
        return self.lower <= self.paper_value <= self.upper

    @property
    def alt_contained(self) -> bool:
        return self.lower <= self.alt_value <= self.upper

    @property
    def mc_consistent(self) -> bool | None:
        """Whether the estimate lies within the bounds, up to its own uncertainty."""
        if self.mc is None or self.mc.half_width is None:
            return None
        slack = self.mc.half_width + self.mc.enclosure_slack
        return float(self.lower) - slack <= self.mc.mean <= float(self.upper) + slack

    def to_json(self) -> dict:
        return {
            "lower": format_rational(self.lower),
            "upper": format_rational(self.upper),
            "lower_decimal": float(self.lower),
            "upper_decimal": float(self.upper),
            "width_decimal": float(self.width),
            "leaf_count": self.leaf_count,
            "max_depth": self.max_depth,
            "node_evaluations": self.node_evaluations,
            "refinements": self.refinements,
            "budget_exhausted": self.budget_exhausted,
            "monotone": self.monotone,
            "paper_value": self.paper_value,
            "alt_value": self.alt_value,
            "paper_contained": self.paper_contained,
            "alt_contained": self.alt_contained,
            "monte_carlo": None if self.mc is None else self.mc.to_json(),
            "mc_consistent": self.mc_consistent,
        }


def leaves_csv(leaves) -> str:
    """CSV with one row per leaf: base, kind, measure, value_lo, value_hi."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["base", "kind", "measure", "value_lo", "value_hi"])
    for leaf in sorted(leaves, key=lambda n: (n.base, n.threshold or 0)):
        w.writerow([
            " ".join(map(str, leaf.base)), leaf.kind, format_rational(leaf.measure),
            format_rational(leaf.value_lo), format_rational(leaf.value_hi),
        ])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Integrator
# --------------------------------------------------------------------------


def certified_integral(
    width_target: Fraction | str | float,
    m_init: int = 4,
    node_budget: int = DEFAULT_NODE_BUDGET,
    keep_leaves: bool = False,
    history: list | None = None,
) -> BoundsReport:
    """Rigorous rational bounds on the integral of ?EM over (0, 1].

    Refines until ``upper - lower <= width_target`` or until ``node_budget``
    node evaluations have been spent, in which case the (still sound) bounds
    are returned with ``budget_exhausted`` set.  If ``history`` is a list,
    the ``(lower, upper)`` pair after every refinement is appended to it.
    """
    width_target = Fraction(width_target) if not isinstance(width_target, float) \
        else Fraction(repr(width_target))
    if width_target <= 0:
        raise InvalidArgument("width_target must be positive")
    if m_init < 2:
        raise InvalidArgument("m_init must be >= 2")

    root = root_node()
    lower, upper = root.contribution()
    evaluations = 1
    refinements = 0
    monotone = True
    # ties on error are broken by (base, threshold) so the schedule is deterministic
    heap = [(-root.error, root.base, -1, root)]
    if history is not None:
        history.append((lower, upper))
    exhausted = False
    while upper - lower > width_target:
        if evaluations >= node_budget:
            exhausted = True
            break
        _, _, _, node = heapq.heappop(heap)
        children = refine(node, m_init)
        evaluations += len(children)
        refinements += 1
        p_lo, p_hi = node.contribution()
        c_lo = sum(ch.measure * ch.value_lo for ch in children)
        c_hi = sum(ch.measure * ch.value_hi for ch in children)
        if c_lo < p_lo or c_hi > p_hi:
            monotone = False
        lower += c_lo - p_lo
        upper += c_hi - p_hi
        for ch in children:
            heapq.heappush(heap, (-ch.error, ch.base, -1 if ch.threshold is None else ch.threshold, ch))
        if history is not None:
            history.append((lower, upper))

    leaves = [entry[3] for entry in heap]
    return BoundsReport(
        lower=lower,
        upper=upper,
        leaf_count=len(leaves),
        max_depth=max(len(leaf.base) for leaf in leaves),
        node_evaluations=evaluations,
        refinements=refinements,
        budget_exhausted=exhausted,
        monotone=monotone,
        paper_value=paper_integral_value(),
        alt_value=alt_integral_value(),
        leaves=leaves if keep_leaves else [],
    )


# --------------------------------------------------------------------------
# Monte Carlo oracle
# --------------------------------------------------------------------------


def _sample_qmark(x: Fraction, digit_depth: int, precision: int) -> tuple[float, float]:
    """Midpoint and half-width of a ?EM enclosure of ``x``, in fixed point.

    Terms are exact multiples of ``2^-precision``.  The series stops after
    ``digit_depth`` terms (tail below ``2^-A``) or before the first term
    finer than the precision; then the next digit ``a`` is known and the
    tail is below ``2^(1-A-a)``.
    """
    total = 0
    A = 0
    n = 0
    radius = None
    for a in _delta(greedy_digits(x, EncodeMode.CANONICAL)):
        if n >= digit_depth:
            radius = 2.0 ** -A
            break
        if A + a > precision:
            radius = 2.0 ** (1 - A - a)
            break
        A += a
        n += 1
        term = 1 << (precision + 1 - A)
        total += term if n % 2 else -term
    # the tail has sign (-1)^n
    half = radius / 2
    mid = total / 2.0 ** precision + (half if n % 2 == 0 else -half)
    return mid, half


def _delta(q_digits):
    prev = 2
    for q in q_digits:
        yield q - prev + 1
        prev = q


def monte_carlo_integral(
    samples: int,
    seed: int = DEFAULT_SEED,
    digit_depth: int = 40,
    bits: int = 53,
) -> MonteCarloEstimate:
    """Average of ?EM enclosure midpoints at uniform dyadic points ``k/2^bits``.

    Independent of the cylinder tree: points are encoded digit by digit and
    evaluated directly.  The half-width is the 99% normal confidence radius;
    the enclosure slack is the largest deviation a midpoint can have from
    the true value at its point.
    """
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    rng = random.Random(seed)
    precision = 2 * bits + 16
    values = []
    slack = 0.0
    for _ in range(samples):
        x = Fraction(rng.getrandbits(bits) + 1, 1 << bits)
        mid, half = _sample_qmark(x, digit_depth, precision)
        values.append(mid)
        slack = max(slack, half)
    mean = math.fsum(values) / samples
    half_width = Z_99 * statistics.stdev(values) / math.sqrt(samples) if samples > 1 else None
    return MonteCarloEstimate(mean, half_width, slack, samples, seed, digit_depth)
