"""Request-level helpers over the lamdiff pipeline."""

import os

from lamdiff.checking import DEFAULT_STEP, CompiledProgram, JacobianReport, evaluate_program, jacobian_report
from lamdiff.combinators import elaborate
from lamdiff.errors import ShapeMismatch
from lamdiff.primitives import Registry, builtin_registry
from lamdiff.sexpr import parse_programs, print_program
from lamdiff.syntax import Program
from lamdiff.transform import check_output, forward_ad, reverse_ad
from lamdiff.typecheck import typecheck_target
from lamdiff.types import Fun

from api.models import OpInfo, TransformResponse

_registry: Registry | None = None

MAX_POINTS = int(os.environ.get("LAMDIFF_MAX_POINTS") or 64)


def load_registry() -> Registry:
    global _registry
    if _registry is None:
        _registry = builtin_registry()
    return _registry


def get_registry() -> Registry:
    if _registry is None:
        raise RuntimeError("Registry not loaded; call load_registry() first")
    return _registry


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------

def _load(source: str, index: int) -> Program:
    programs = parse_programs(source)
    try:
        return programs[index]
    except IndexError:
        raise ShapeMismatch(f"no program at index {index}; the source holds {len(programs)}") from None


def _check_size(*vectors: list[float] | None) -> None:
    for vector in vectors:
        if vector is not None and len(vector) > MAX_POINTS:
            raise ShapeMismatch(f"at most {MAX_POINTS} coordinates are accepted, got {len(vector)}")


# ---------------------------------------------------------------------------
# Public functions
# ---------------------------------------------------------------------------

def program_type(source: str, index: int = -1) -> str:
    program = _load(source, index)
    ty = typecheck_target({program.arg: program.arg_type}, program.body, get_registry())
    return str(Fun(program.arg_type, ty))


def transform(source: str, mode: str, index: int = -1) -> TransformResponse:
    registry = get_registry()
    program = _load(source, index)
    c = elaborate({program.arg: program.arg_type}, program.body, registry)
    out = forward_ad(c, registry) if mode == "forward" else reverse_ad(c, registry)
    check_output(out, registry)
    return TransformResponse(
        mode=out.mode.value,
        primal=print_program(out.primal_program()),
        derivative=print_program(out.deriv_program()),
        primal_type=str(Fun(out.arg_type, out.expected_primal_type())),
        derivative_type=str(Fun(out.arg_type, out.expected_deriv_type())),
    )


def evaluate(source: str, point: list[float], direction: list[float] | None = None, index: int = -1) -> list[float]:
    _check_size(point, direction)
    program = _load(source, index)
    return evaluate_program(program, point, direction, get_registry()).tolist()


def jacobian(source: str, point: list[float], h: float = DEFAULT_STEP, index: int = -1) -> JacobianReport:
    _check_size(point)
    compiled = CompiledProgram.build(_load(source, index), get_registry())
    return jacobian_report(compiled, point, h)


def list_ops() -> list[OpInfo]:
    registry = get_registry()
    ops = [
        OpInfo(name=spec.name, arity=spec.arity, higher_order=spec.higher_order, linear=False,
               description=spec.description or None)
        for spec in registry.values()
    ]
    ops += [
        OpInfo(name=spec.name, arity=1, higher_order=spec.higher_order, linear=True)
        for spec in registry.linear.values()
    ]
    return ops
