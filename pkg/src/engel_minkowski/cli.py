"""Command-line front end.

Exit codes: 0 success, 1 a checked property failed, 2 bad input or a value
outside (0, 1], 3 the operation is not supported for the given spec.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import digits as dg
from . import integrate as ig
from . import qmark as qm
from .errors import InvalidArgument, OutOfDomain, Unsupported
from .numerics import format_rational, parse_rational
from .selfcheck import run_selfcheck
from .serialize import dumps

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 2, 3


def _spec(text: str) -> dg.DigitSpec:
    return dg.parse_spec(text)


def _out(args, text: str) -> None:
    path = getattr(args, "output", None)
    if path:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_encode(args) -> int:
    spec = dg.engel_encode(parse_rational(args.x), dg.EncodeMode(args.mode))
    _out(args, dg.format_spec(spec))
    if args.as_a:
        _out(args, dg.format_spec(dg.q_to_a(spec)))
    return EXIT_OK


def cmd_decode(args) -> int:
    iv = dg.engel_decode(_spec(args.spec), args.depth)
    _out(args, dumps(iv))
    return EXIT_OK


def cmd_convert(args) -> int:
    spec = _spec(args.spec)
    other = dg.q_to_a(spec) if spec.alphabet is dg.Alphabet.Q else dg.a_to_q(spec)
    _out(args, dg.format_spec(other))
    return EXIT_OK


def cmd_shift(args) -> int:
    spec = _spec(args.spec)
    shift = dg.shift_q if args.kind == "q" else dg.shift_a
    for _ in range(args.times):
        spec = shift(spec)
    _out(args, dg.format_spec(spec))
    return EXIT_OK


def cmd_cylinder(args) -> int:
    spec = _spec(args.spec)
    if spec.alphabet is dg.Alphabet.A:
        spec = dg.a_to_q(spec)
    if not spec.is_finite:
        raise InvalidArgument("a cylinder base must be a finite digit list")
    _out(args, dumps(dg.cylinder(spec.preperiod)))
    return EXIT_OK


def cmd_qmark(args) -> int:
    if args.action == "invert":
        _out(args, dg.format_spec(qm.qmark_inverse(parse_rational(args.value))))
    elif args.action == "exact":
        _out(args, format_rational(qm.qmark_exact(_spec(args.value))))
    else:
        _out(args, dumps(qm.qmark_eval(_spec(args.value), args.depth)))
    return EXIT_OK


def cmd_deriv(args) -> int:
    spec = _spec(args.spec)
    if args.cylinder:
        if spec.alphabet is dg.Alphabet.Q:
            spec = dg.q_to_a(spec)
        if not spec.is_finite:
            raise InvalidArgument("--cylinder needs a finite base")
        _out(args, dumps(qm.cylinder_derivative(spec.preperiod)))
    else:
        _out(args, dumps(qm.derivative_trace(spec, args.depth)))
    return EXIT_OK


def cmd_witness(args) -> int:
    spec = _spec(args.base) if args.base else dg.DigitSpec(dg.Alphabet.A, ())
    if spec.alphabet is dg.Alphabet.Q:
        spec = dg.q_to_a(spec)
    if not spec.is_finite:
        raise InvalidArgument("witness base must be a finite digit list")
    inc, dec = qm.monotonicity_witnesses(spec.preperiod)
    _out(args, dumps({"increasing": inc.to_json(), "decreasing": dec.to_json()}))
    return EXIT_OK


def cmd_continuity(args) -> int:
    check = qm.continuity_bound_check(_spec(args.x1), _spec(args.x2))
    _out(args, dumps(check))
    return EXIT_OK if check.holds else EXIT_PROPERTY


def cmd_integrate(args) -> int:
    if args.width is None and args.mc is None:
        raise InvalidArgument("give --width and/or --mc")
    mc = None
    if args.mc is not None:
        mc = ig.monte_carlo_integral(args.mc, args.seed, args.digit_depth)
    if args.width is None:
        _out(args, dumps(mc))
        return EXIT_OK
    width = Fraction(args.width)
    report = ig.certified_integral(width, args.m_init, args.budget, keep_leaves=bool(args.leaves_csv))
    report.mc = mc
    if args.leaves_csv:
        with open(args.leaves_csv, "w") as fh:
            fh.write(ig.leaves_csv(report.leaves))
    _out(args, dumps(report))
    return EXIT_OK


def cmd_plotdata(args) -> int:
    _out(args, qm.plot_csv(args.samples, args.depth))
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    results = run_selfcheck(args.level, inject=args.inject)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name} ({r.seconds:.2f}s){'' if r.passed else ': ' + r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_PROPERTY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def _positive_fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="engel-minkowski",
        description="Engel expansions and the Engel-Minkowski question-mark function.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="Engel q-digits of a rational p/q in (0, 1]")
    p.add_argument("x")
    p.add_argument("--mode", choices=[m.value for m in dg.EncodeMode], default="finite")
    p.add_argument("--as-a", action="store_true", help="also print the a-digit form")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="value (exact) or bracketing interval at --depth")
    p.add_argument("spec")
    p.add_argument("--depth", type=_positive_int)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("convert", help="switch between q- and a-digits")
    p.add_argument("spec")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("shift", help="apply the q-shift or the a-shift")
    p.add_argument("spec")
    p.add_argument("--kind", choices=["q", "a"], default="q")
    p.add_argument("--times", type=_positive_int, default=1)
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("cylinder", help="endpoints and measure of a cylinder")
    p.add_argument("spec", help="finite base, e.g. q:[2,3]")
    p.set_defaults(func=cmd_cylinder)

    p = sub.add_parser("qmark", help="evaluate, sum exactly or invert ?EM")
    p.add_argument("action", choices=["eval", "exact", "invert"])
    p.add_argument("value", help="digit spec (eval, exact) or rational y (invert)")
    p.add_argument("--depth", type=_positive_int, default=20)
    p.set_defaults(func=cmd_qmark)

    p = sub.add_parser("deriv", help="derivative product trace")
    p.add_argument("spec")
    p.add_argument("--depth", type=_positive_int, default=50)
    p.add_argument("--cylinder", action="store_true", help="treat spec as a cylinder base")
    p.set_defaults(func=cmd_deriv)

    p = sub.add_parser("witness", help="non-monotonicity witnesses inside a cylinder")
    p.add_argument("base", nargs="?", default=None)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("continuity", help="check the digit-sum continuity bound")
    p.add_argument("x1")
    p.add_argument("x2")
    p.set_defaults(func=cmd_continuity)

    p = sub.add_parser("integrate", help="certified bounds and/or Monte Carlo estimate")
    p.add_argument("--width", type=_positive_fraction)
    p.add_argument("--m-init", type=int, default=4)
    p.add_argument("--budget", type=_positive_int, default=ig.DEFAULT_NODE_BUDGET)
    p.add_argument("--mc", type=_positive_int, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=ig.DEFAULT_SEED)
    p.add_argument("--digit-depth", type=_positive_int, default=40)
    p.add_argument("--leaves-csv", help="write the final leaf cylinders to this CSV file")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("plot-data", help="CSV of certified ?EM enclosures on a grid")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--depth", type=_positive_int, default=20)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("selfcheck", help="run the property suites")
    p.add_argument("--level", choices=["fast", "full"], default="fast")
    p.add_argument("--inject", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Unsupported as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (InvalidArgument, OutOfDomain) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
