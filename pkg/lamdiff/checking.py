"""Numerical oracles for emitted derivatives.

Programs of first-order type `σ -> τ` are checked at concrete points: the
forward derivative against basis tangents, the reverse derivative against
basis cotangents, and both against central finite differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from lamdiff.combinators import Combinator, elaborate
from lamdiff.errors import InvalidStep, NonFirstOrderType, ShapeMismatch
from lamdiff.evaluator import Evaluator
from lamdiff.primitives import Registry, builtin_registry
from lamdiff.syntax import Program
from lamdiff.transform import AdOutput, check_output, forward_ad, reverse_ad
from lamdiff.typecheck import typecheck_source, typecheck_target
from lamdiff.types import LinFun, Type, is_first_order, width
from lamdiff.values import Value, flatten, to_value

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4
FWD_REV_TOLERANCE = 1e-10
FD_TOLERANCE = 1e-4


class JacobianReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    point: list[float]
    jac_fwd: list[list[float]] = Field(serialization_alias="jacFwd")
    jac_rev: list[list[float]] = Field(serialization_alias="jacRev")
    jac_fd: list[list[float]] = Field(serialization_alias="jacFD")
    max_rel_err_fwd_rev: float = Field(serialization_alias="maxRelErrFwdRev")
    max_rel_err_fwd_fd: float = Field(serialization_alias="maxRelErrFwdFD")

    def passes(self, rev_tol: float = FWD_REV_TOLERANCE, fd_tol: float = FD_TOLERANCE) -> bool:
        return self.max_rel_err_fwd_rev <= rev_tol and self.max_rel_err_fwd_fd <= fd_tol


def relative_error(a, b) -> float:
    """max |a - b| / (1 + |b|), or 0 for empty inputs."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"comparing arrays of shape {a.shape} and {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))


@dataclass
class CompiledProgram:
    """A first-order program together with its transformed versions."""

    program: Program
    combinator: Combinator
    forward: AdOutput
    reverse: AdOutput
    evaluator: Evaluator

    @classmethod
    def build(cls, program: Program, registry: Registry | None = None) -> CompiledProgram:
        registry = registry or builtin_registry()
        ctx = {program.arg: program.arg_type}
        result_type = typecheck_source(ctx, program.body, registry)
        if not (is_first_order(program.arg_type) and is_first_order(result_type)):
            raise NonFirstOrderType(
                f"program type {program.arg_type} -> {result_type} is not first-order"
            )
        combinator = elaborate(ctx, program.body, registry)
        forward, reverse = forward_ad(combinator, registry), reverse_ad(combinator, registry)
        check_output(forward, registry)
        check_output(reverse, registry)
        return cls(program, combinator, forward, reverse, Evaluator(registry))

    @property
    def source_type(self) -> Type:
        return self.program.arg_type

    @property
    def result_type(self) -> Type:
        return self.combinator.cod()

    @property
    def in_width(self) -> int:
        return width(self.source_type)

    @property
    def out_width(self) -> int:
        return width(self.result_type)

    def _point(self, x) -> dict[str, Value]:
        return {self.program.arg: to_value(self.source_type, x)}

    def value(self, x) -> np.ndarray:
        return flatten(self.evaluator.eval(self._point(x), self.program.body))

    def primal(self, out: AdOutput, x) -> np.ndarray:
        return flatten(self.evaluator.eval({out.arg: to_value(self.source_type, x)}, out.primal))

    def derivative(self, out: AdOutput, x) -> Value:
        """The emitted linear function at `x`."""
        return self.evaluator.eval({out.arg: to_value(self.source_type, x)}, out.deriv)

    def jvp(self, x, v) -> np.ndarray:
        lin = self.derivative(self.forward, x)
        return flatten(self.evaluator.apply(lin, to_value(self.source_type, v)))

    def vjp(self, x, w) -> np.ndarray:
        lin = self.derivative(self.reverse, x)
        return flatten(self.evaluator.apply(lin, to_value(self.result_type, w)))


def compile_program(program: Program | CompiledProgram, registry: Registry | None = None) -> CompiledProgram:
    if isinstance(program, CompiledProgram):
        return program
    return CompiledProgram.build(program, registry)


def central_difference(program, x, v, h: float = DEFAULT_STEP) -> np.ndarray:
    """(f(x + hv) - f(x - hv)) / 2h."""
    if not h > 0:
        raise InvalidStep(f"step must be positive, got {h}")
    compiled = compile_program(program)
    x, v = _vector(x, compiled.in_width, "point"), _vector(v, compiled.in_width, "direction")
    return (compiled.value(x + h * v) - compiled.value(x - h * v)) / (2 * h)


def jacobian_report(program, x, h: float = DEFAULT_STEP) -> JacobianReport:
    compiled = compile_program(program)
    n, m = compiled.in_width, compiled.out_width
    x = _vector(x, n, "point")

    fwd = compiled.derivative(compiled.forward, x)
    rev = compiled.derivative(compiled.reverse, x)
    apply = compiled.evaluator.apply
    basis_in, basis_out = np.eye(n), np.eye(m)

    jac_fwd = np.zeros((m, n))
    jac_fd = np.zeros((m, n))
    for j in range(n):
        jac_fwd[:, j] = flatten(apply(fwd, to_value(compiled.source_type, basis_in[j])))
        jac_fd[:, j] = central_difference(compiled, x, basis_in[j], h)
    jac_rev = np.zeros((m, n))
    for i in range(m):
        jac_rev[i, :] = flatten(apply(rev, to_value(compiled.result_type, basis_out[i])))

    report = JacobianReport(
        point=x.tolist(),
        jac_fwd=jac_fwd.tolist(),
        jac_rev=jac_rev.tolist(),
        jac_fd=jac_fd.tolist(),
        max_rel_err_fwd_rev=relative_error(jac_fwd, jac_rev),
        max_rel_err_fwd_fd=relative_error(jac_fwd, jac_fd),
    )
    logger.debug(
        "jacobian at %s: fwd/rev %.3g, fwd/fd %.3g",
        report.point, report.max_rel_err_fwd_rev, report.max_rel_err_fwd_fd,
    )
    return report


def transpose_consistency(program, x, v, w) -> tuple[float, float]:
    """(<w, Df(x) v>, <Df(x)^T w, v>)."""
    compiled = compile_program(program)
    x = _vector(x, compiled.in_width, "point")
    v = _vector(v, compiled.in_width, "tangent")
    w = _vector(w, compiled.out_width, "cotangent")
    lhs = float(np.dot(w, compiled.jvp(x, v)))
    rhs = float(np.dot(compiled.vjp(x, w), v))
    return lhs, rhs


def _vector(values, size: int, label: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size != size:
        raise ShapeMismatch(f"{label} has {arr.size} entries, expected {size}")
    return arr


def evaluate_program(program: Program, point, direction=None, registry: Registry | None = None) -> np.ndarray:
    """Value of `program` at `point`; a linear-function result is applied to `direction`."""
    ty = typecheck_target({program.arg: program.arg_type}, program.body, registry)
    evaluator = Evaluator(registry)
    value = evaluator.eval({program.arg: to_value(program.arg_type, point)}, program.body)
    if isinstance(ty, LinFun) and is_first_order(ty.dom) and is_first_order(ty.cod):
        if direction is None:
            raise ShapeMismatch(f"the program returns {ty}; a direction is required")
        value = evaluator.apply(value, to_value(ty.dom, direction))
    elif not is_first_order(ty):
        raise NonFirstOrderType(f"cannot observe a value of type {ty}")
    return flatten(value)
