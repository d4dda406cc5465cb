"""Random well-typed programs and the corpus check built on them.

Generated programs have first-order argument and result types but may use
lambdas, applications, let-bound functions and `map` inside. Multiplicative
operations and shared bindings receive half the remaining depth, which keeps
polynomial degrees small enough for finite differences at the default step.
"""

from __future__ import annotations

import logging
from enum import Enum
from pathlib import Path
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from lamdiff.checking import (
    DEFAULT_STEP,
    FD_TOLERANCE,
    FWD_REV_TOLERANCE,
    CompiledProgram,
    jacobian_report,
)
from lamdiff.errors import GenerationExhausted, LamDiffError, NonFirstOrderType, TypeCheckError
from lamdiff.names import Fresh
from lamdiff.primitives import Registry, builtin_registry
from lamdiff.syntax import App, Fst, Lam, Let, Op, Pair, Program, Snd, Term, UnitVal, Var, const
from lamdiff.typecheck import typecheck_source
from lamdiff.types import REAL1, Fun, Prod, Real, Type, Unit, is_first_order

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 6
DEFAULT_MAX_WIDTH = 4
DEFAULT_POINTS_PER_PROGRAM = 5
DEFAULT_CORPUS_SIZE = 500
SAMPLE_RANGE = (-2.0, 2.0)
CONSTANT_RANGE = (-1.0, 1.0)

_ATTEMPTS = 8


class Category(Enum):
    STRUCTURAL = "structural"
    OP = "op"
    LAMBDA = "lambda"
    MAP = "map"
    LET = "let"


CATEGORY_WEIGHTS: dict[Category, float] = {
    Category.STRUCTURAL: 0.35,
    Category.OP: 0.25,
    Category.LAMBDA: 0.20,
    Category.MAP: 0.10,
    Category.LET: 0.10,
}

Scope = tuple[tuple[str, Type], ...]


class _Generator:
    def __init__(self, rng: np.random.Generator, max_width: int):
        self.rng = rng
        self.max_width = max_width
        self.fresh = Fresh()
        self._categories = list(CATEGORY_WEIGHTS)
        self._weights = np.array(list(CATEGORY_WEIGHTS.values()))

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def real_type(self, low: int = 1) -> Real:
        return Real(int(self.rng.integers(low, self.max_width + 1)))

    def binder_type(self) -> Type:
        if self.rng.random() < 0.25 and self.max_width >= 2:
            return Prod(REAL1, self.real_type())
        return self.real_type()

    def function_type(self) -> Fun:
        if self.rng.random() < 0.5:
            return Fun(REAL1, REAL1)
        return Fun(self.real_type(), self.real_type())

    # ---------------------------------------------------------------------

    def gen(self, scope: Scope, ty: Type, depth: int) -> Term:
        if isinstance(ty, Fun):
            x = self.fresh("x")
            return Lam(x, ty.dom, self.gen(scope + ((x, ty.dom),), ty.cod, depth - 1))
        if depth <= 0:
            return self.leaf(scope, ty)
        category = self._categories[int(self.rng.choice(len(self._categories), p=self._weights))]
        builder: Callable[[Scope, Type, int], Term | None] = getattr(self, f"_{category.value}")
        return builder(scope, ty, depth) or self._structural(scope, ty, depth)

    def _structural(self, scope: Scope, ty: Type, depth: int) -> Term:
        match ty:
            case Prod(left, right):
                return Pair(self.gen(scope, left, depth - 1), self.gen(scope, right, depth - 1))
            case Unit():
                return UnitVal()
        other = self.real_type()
        if self.rng.random() < 0.5:
            return Fst(self.gen(scope, Prod(ty, other), depth - 1))
        return Snd(self.gen(scope, Prod(other, ty), depth - 1))

    def _op(self, scope: Scope, ty: Type, depth: int) -> Term | None:
        if not isinstance(ty, Real):
            return None
        n, half, step = ty.n, depth // 2, depth - 1
        choices: list[tuple[str, Type, int]] = [
            ("add", Prod(ty, ty), step),
            ("sub", Prod(ty, ty), step),
            ("mul", Prod(ty, ty), half),
            ("neg", ty, step),
            ("sin", ty, step),
            ("cos", ty, step),
            ("sigmoid", ty, step),
            ("square", ty, half),
            ("rescale", Prod(REAL1, ty), half),
        ]
        m = int(self.rng.integers(1, 4))
        choices.append(("matvec", Prod(Real(n * m), Real(m)), half))
        if n == 1:
            k = self.real_type()
            choices += [
                ("sum", k, step),
                ("inner", Prod(k, k), half),
                ("mul2", Real(2), half),
            ]
        if n == 2:
            choices.append(("swap", ty, step))
        name, arg_type, arg_depth = self.pick(choices)
        return Op(name, self.gen(scope, arg_type, arg_depth))

    def _lambda(self, scope: Scope, ty: Type, depth: int) -> Term:
        if self.rng.random() < 0.3:
            fn_type = self.function_type()
            f = self.fresh("f")
            body = self.gen(scope + ((f, fn_type),), ty, depth - 1)
            return App(Lam(f, fn_type, body), self.gen(scope, fn_type, depth // 2))
        sigma = self.binder_type()
        x = self.fresh("x")
        body = self.gen(scope + ((x, sigma),), ty, depth - 1)
        return App(Lam(x, sigma, body), self.gen(scope, sigma, depth // 2))

    def _map(self, scope: Scope, ty: Type, depth: int) -> Term | None:
        if not isinstance(ty, Real):
            return None
        u = self.fresh("u")
        body = self.gen(scope + ((u, REAL1),), REAL1, depth - 1)
        return Op("map", Pair(Lam(u, REAL1, body), self.gen(scope, ty, depth - 1)))

    def _let(self, scope: Scope, ty: Type, depth: int) -> Term:
        sigma = self.function_type() if self.rng.random() < 0.5 else self.binder_type()
        x = self.fresh("f" if isinstance(sigma, Fun) else "x")
        bound = self.gen(scope, sigma, depth // 2)
        return Let(x, bound, self.gen(scope + ((x, sigma),), ty, depth - 1))

    # ---------------------------------------------------------------------

    def leaf(self, scope: Scope, ty: Type, calls: bool = True) -> Term:
        if isinstance(ty, Fun):
            x = self.fresh("x")
            return Lam(x, ty.dom, self.leaf(scope + ((x, ty.dom),), ty.cod, calls))
        candidates: list[Callable[[], Term]] = []
        for name, var_type in scope:
            for path in _projections(Var(name), var_type, ty):
                candidates.append(lambda path=path: path)
            if calls and isinstance(var_type, Fun) and var_type.cod == ty:
                candidates.append(
                    lambda name=name, dom=var_type.dom: App(
                        Var(name), self.leaf(scope, dom, calls=False)
                    )
                )
        if candidates and self.rng.random() < 0.85:
            return self.pick(candidates)()
        return self.constant(scope, ty)

    def constant(self, scope: Scope, ty: Type) -> Term:
        match ty:
            case Real(n):
                values = self.rng.uniform(*CONSTANT_RANGE, size=n).round(3)
                return const(values)
            case Unit():
                return UnitVal()
            case Prod(left, right):
                return Pair(self.leaf(scope, left, calls=False), self.leaf(scope, right, calls=False))
        raise NonFirstOrderType(f"no constant of type {ty}")


def _projections(term: Term, term_type: Type, target: Type):
    if term_type == target:
        yield term
    if isinstance(term_type, Prod):
        yield from _projections(Fst(term), term_type.left, target)
        yield from _projections(Snd(term), term_type.right, target)


def gen_random_program(
    seed: int,
    max_depth: int,
    src_type: Type,
    dst_type: Type,
    registry: Registry | None = None,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> Lam:
    """A closed, well-typed term of type `src_type -> dst_type`."""
    if not (is_first_order(src_type) and is_first_order(dst_type)):
        raise NonFirstOrderType("random programs map first-order types to first-order types")
    registry = registry or builtin_registry()
    for attempt in range(_ATTEMPTS):
        gen = _Generator(np.random.default_rng([seed, attempt]), max_width)
        term = Lam("arg", src_type, gen.gen((("arg", src_type),), dst_type, max_depth))
        try:
            typecheck_source({}, term, registry)
        except TypeCheckError as exc:
            logger.debug("seed %d attempt %d produced an ill-typed term: %s", seed, attempt, exc)
            continue
        return term
    raise GenerationExhausted(f"no well-typed program for seed {seed} within {_ATTEMPTS} attempts")


def random_signature(rng: np.random.Generator, max_width: int = DEFAULT_MAX_WIDTH) -> tuple[Type, Type]:
    return _random_first_order(rng, max_width), _random_first_order(rng, max_width)


def _random_first_order(rng: np.random.Generator, max_width: int) -> Type:
    if max_width >= 2 and rng.random() < 0.3:
        left = int(rng.integers(1, max_width))
        right = int(rng.integers(1, max_width - left + 1))
        return Prod(Real(left), Real(right))
    return Real(int(rng.integers(1, max_width + 1)))


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------

class FuzzRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    seed: int
    type: str
    max_rel_err_fwd_rev: float = Field(0.0, serialization_alias="maxRelErrFwdRev")
    max_rel_err_fwd_fd: float = Field(0.0, serialization_alias="maxRelErrFwdFD")
    primal_exact: bool = Field(True, serialization_alias="primalExact")
    status: Literal["pass", "fail", "error"]
    message: str | None = None


def random_program(seed: int, max_depth: int = DEFAULT_MAX_DEPTH, max_width: int = DEFAULT_MAX_WIDTH) -> Program:
    """Program with a signature and body both drawn from `seed`."""
    src, dst = random_signature(np.random.default_rng(seed), max_width)
    return Program.from_term(gen_random_program(seed, max_depth, src, dst, max_width=max_width), src)


def check_program(
    seed: int,
    max_depth: int = DEFAULT_MAX_DEPTH,
    points: int = DEFAULT_POINTS_PER_PROGRAM,
    h: float = DEFAULT_STEP,
    rev_tol: float = FWD_REV_TOLERANCE,
    fd_tol: float = FD_TOLERANCE,
    registry: Registry | None = None,
) -> FuzzRecord:
    src, dst = random_signature(np.random.default_rng(seed))
    type_str = str(Fun(src, dst))
    try:
        term = gen_random_program(seed, max_depth, src, dst, registry)
        compiled = CompiledProgram.build(Program.from_term(term, src), registry)
    except LamDiffError as exc:
        return FuzzRecord(seed=seed, type=type_str, status="error", message=str(exc))

    rng = np.random.default_rng([seed, 1])
    err_rev = err_fd = 0.0
    exact = True
    for _ in range(points):
        x = rng.uniform(*SAMPLE_RANGE, size=compiled.in_width)
        report = jacobian_report(compiled, x, h)
        err_rev = max(err_rev, report.max_rel_err_fwd_rev)
        err_fd = max(err_fd, report.max_rel_err_fwd_fd)
        value = compiled.value(x)
        exact = exact and all(
            np.array_equal(value, compiled.primal(out, x)) for out in (compiled.forward, compiled.reverse)
        )
    ok = exact and err_rev <= rev_tol and err_fd <= fd_tol
    return FuzzRecord(
        seed=seed,
        type=type_str,
        max_rel_err_fwd_rev=err_rev,
        max_rel_err_fwd_fd=err_fd,
        primal_exact=exact,
        status="pass" if ok else "fail",
    )


def run_corpus(
    seed: int = 0,
    count: int = DEFAULT_CORPUS_SIZE,
    max_depth: int = DEFAULT_MAX_DEPTH,
    points: int = DEFAULT_POINTS_PER_PROGRAM,
    h: float = DEFAULT_STEP,
    registry: Registry | None = None,
) -> list[FuzzRecord]:
    records = []
    for i in range(count):
        record = check_program(seed + i, max_depth, points, h, registry=registry)
        if record.status != "pass":
            logger.warning("program %d %s: %s", record.seed, record.status, record.message or record.type)
        records.append(record)
        if (i + 1) % 50 == 0:
            logger.info("checked %d/%d programs", i + 1, count)
    return records


def write_report(path: Path | str, records: list[FuzzRecord]) -> None:
    """One JSON object per line."""
    lines = [record.model_dump_json(by_alias=True) for record in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
