"""Engel expansions and the Engel-Minkowski question-mark function, in exact arithmetic."""

from .digits import (
    Alphabet,
    Cylinder,
    DigitSpec,
    EncodeMode,
    a_to_q,
    certify_digits,
    cylinder,
    engel_decode,
    engel_encode,
    engel_value,
    format_spec,
    parse_spec,
    q_to_a,
    shift_a,
    shift_q,
)
from .errors import EngelError, InvalidArgument, OutOfDomain, Unsupported
from .integrate import (
    BoundsReport,
    alt_integral_value,
    certified_integral,
    monte_carlo_integral,
    paper_integral_value,
    series_S1,
    series_S2,
)
from .numerics import Dyadic, RatInterval, interval_width, rat_make
from .qmark import (
    QMarkValue,
    continuity_bound_check,
    cylinder_derivative,
    derivative_trace,
    functional_check,
    monotonicity_witnesses,
    qmark_eval,
    qmark_exact,
    qmark_inverse,
)

__version__ = "0.1.0"
