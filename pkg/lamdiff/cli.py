"""Command-line driver.

    python -m lamdiff check FILE
    python -m lamdiff fwd FILE [-o OUT] [--raw-combinators]
    python -m lamdiff rev FILE [-o OUT] [--raw-combinators]
    python -m lamdiff eval FILE --point CSV [--direction CSV]
    python -m lamdiff jacobian FILE --point CSV [--mode fwd|rev|fd]
    python -m lamdiff gradcheck FILE --point CSV [--h H] [--tol T]
    python -m lamdiff fuzz [--seed S] [--count K] [--depth D] [--report PATH]

Exit status: 0 success, 1 parse/type/shape error, 2 tolerance failure,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from lamdiff.checking import (
    DEFAULT_STEP,
    FD_TOLERANCE,
    FWD_REV_TOLERANCE,
    CompiledProgram,
    evaluate_program,
    jacobian_report,
)
from lamdiff.combinators import elaborate
from lamdiff.errors import InvariantViolation, LamDiffError, NoRuleApplies, ShapeMismatch
from lamdiff.fuzz import DEFAULT_CORPUS_SIZE, DEFAULT_MAX_DEPTH, DEFAULT_POINTS_PER_PROGRAM, run_corpus, write_report
from lamdiff.sexpr import format_float, parse_programs, print_combinator, print_program
from lamdiff.syntax import Program
from lamdiff.transform import AdOutput, Mode, check_output, forward_ad, reverse_ad
from lamdiff.typecheck import typecheck_target
from lamdiff.types import Fun

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_TOLERANCE = 2
EXIT_INVARIANT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamdiff",
        description="Forward- and reverse-mode AD for a typed lambda calculus over real arrays.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug output to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_file(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", type=Path, help="Program file")
        p.add_argument(
            "--index", type=int, default=-1,
            help="Which (program ...) form to use (default: the last one)",
        )
        return p

    with_file("check", "Print the type of a program")
    for mode in ("fwd", "rev"):
        p = with_file(mode, f"Emit the {'forward' if mode == 'fwd' else 'reverse'}-mode primal and derivative programs")
        p.add_argument("-o", "--output", type=Path, help="Write the programs to this file")
        p.add_argument("--raw-combinators", action="store_true", help="Print the combinator IR instead")

    p = with_file("eval", "Evaluate a program at a point")
    p.add_argument("--point", required=True, help="Comma-separated argument scalars")
    p.add_argument("--direction", help="Tangent or cotangent for programs returning linear functions")

    p = with_file("jacobian", "Print the Jacobian at a point as CSV rows")
    p.add_argument("--point", required=True, help="Comma-separated argument scalars")
    p.add_argument("--mode", choices=["fwd", "rev", "fd"], default="fwd")
    p.add_argument("--h", type=float, default=DEFAULT_STEP, help="Finite-difference step")

    p = with_file("gradcheck", "Compare forward, reverse and finite-difference Jacobians")
    p.add_argument("--point", required=True, help="Comma-separated argument scalars")
    p.add_argument("--h", type=float, default=DEFAULT_STEP, help="Finite-difference step")
    p.add_argument("--tol", type=float, default=FD_TOLERANCE, help="Tolerance against finite differences")

    p = sub.add_parser("fuzz", help="Check derivatives of randomly generated programs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=DEFAULT_CORPUS_SIZE)
    p.add_argument("--depth", type=int, default=DEFAULT_MAX_DEPTH)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS_PER_PROGRAM)
    p.add_argument("--report", type=Path, help="Write one JSON record per program to this file")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG)

    handler = _COMMANDS[args.command]
    label = str(getattr(args, "file", "lamdiff"))
    try:
        return handler(args)
    except (InvariantViolation, NoRuleApplies) as exc:
        print(f"{label}: internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except LamDiffError as exc:
        print(f"{label}:{exc}" if exc.location else f"{label}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"{label}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _load(args) -> Program:
    programs = parse_programs(args.file.read_text(encoding="utf-8"))
    try:
        return programs[args.index]
    except IndexError:
        raise LamDiffError(f"no program at index {args.index}; the file holds {len(programs)}") from None


def _csv(text: str, label: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",") if part.strip()], dtype=np.float64)
    except ValueError:
        raise ShapeMismatch(f"--{label} must be comma-separated numbers, got '{text}'") from None


def _format_row(values) -> str:
    return ",".join(format_float(v) for v in values)


def _emit(text: str, output: Path | None) -> None:
    if output is not None:
        output.write_text(text, encoding="utf-8")
        print(f"Wrote {output}")
    else:
        print(text, end="")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _check(args) -> int:
    program = _load(args)
    print(Fun(program.arg_type, typecheck_target({program.arg: program.arg_type}, program.body)))
    return EXIT_OK


def _transform(args) -> int:
    program = _load(args)
    c = elaborate({program.arg: program.arg_type}, program.body)
    if args.raw_combinators:
        _emit(print_combinator(c) + "\n", args.output)
        return EXIT_OK
    out: AdOutput = forward_ad(c) if args.command == "fwd" else reverse_ad(c)
    check_output(out)
    kind = "forward" if out.mode is Mode.FORWARD else "reverse"
    deriv_type = out.expected_deriv_type()
    text = (
        print_program(out.primal_program(), f"{kind} primal: {Fun(out.arg_type, out.expected_primal_type())}")
        + "\n"
        + print_program(out.deriv_program(), f"{kind} derivative: {Fun(out.arg_type, deriv_type)}")
    )
    _emit(text, args.output)
    return EXIT_OK


def _eval(args) -> int:
    program = _load(args)
    direction = None if args.direction is None else _csv(args.direction, "direction")
    print(_format_row(evaluate_program(program, _csv(args.point, "point"), direction)))
    return EXIT_OK


def _jacobian(args) -> int:
    report = jacobian_report(CompiledProgram.build(_load(args)), _csv(args.point, "point"), args.h)
    matrix = {"fwd": report.jac_fwd, "rev": report.jac_rev, "fd": report.jac_fd}[args.mode]
    for row in matrix:
        print(_format_row(row))
    return EXIT_OK


def _gradcheck(args) -> int:
    report = jacobian_report(CompiledProgram.build(_load(args)), _csv(args.point, "point"), args.h)
    ok = report.passes(FWD_REV_TOLERANCE, args.tol)
    print(f"fwd/rev max relative error: {report.max_rel_err_fwd_rev:.3e} (tolerance {FWD_REV_TOLERANCE:.0e})")
    print(f"fwd/fd  max relative error: {report.max_rel_err_fwd_fd:.3e} (tolerance {args.tol:.0e})")
    print("OK" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_TOLERANCE


def _fuzz(args) -> int:
    records = run_corpus(args.seed, args.count, args.depth, args.points)
    if args.report is not None:
        write_report(args.report, records)
        print(f"Wrote {len(records)} records to {args.report}")
    counts = {status: sum(r.status == status for r in records) for status in ("pass", "fail", "error")}
    print(f"{counts['pass']} passed, {counts['fail']} failed, {counts['error']} errors")
    if counts["error"]:
        return EXIT_INVARIANT
    return EXIT_OK if counts["fail"] == 0 else EXIT_TOLERANCE


_COMMANDS = {
    "check": _check,
    "fwd": _transform,
    "rev": _transform,
    "eval": _eval,
    "jacobian": _jacobian,
    "gradcheck": _gradcheck,
    "fuzz": _fuzz,
}
