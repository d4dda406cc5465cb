"""Forward- and reverse-mode AD macros on the combinator IR.

Each rule maps a combinator `c : A -> B` and a variable `x : D[A]1` to a
primal term of type `D[B]1` and a derivative term of type
`linfun D[A]2 D[B]2` (forward) or `linfun D[B]2 D[A]2` (reverse), both over
`x`. Primals of composites are let-bound once and shared by the derivative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from lamdiff.combinators import (
    Combinator,
    Comp,
    Curry,
    Ev,
    FstC,
    Id,
    OpC,
    PairC,
    SndC,
    Terminal,
)
from lamdiff.errors import InvariantViolation, TypeCheckError
from lamdiff.names import Fresh
from lamdiff.primitives import Registry, builtin_registry
from lamdiff.syntax import (
    App,
    Fst,
    Lam,
    LComp,
    LCurryInv,
    LEval,
    LFst,
    LId,
    LPair,
    LSing,
    LSnd,
    LSwap,
    Let,
    Pair,
    Plus,
    Program,
    Snd,
    Term,
    UnitVal,
    Var,
    Zero,
    term_size,
)
from lamdiff.typecheck import typecheck_target
from lamdiff.types import UNIT, Fun, LinFun, Prod, Type, type_translate_fwd, type_translate_rev

logger = logging.getLogger(__name__)

ROOT_VAR = "arg"


class Mode(str, Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


@dataclass(frozen=True)
class AdOutput:
    primal: Term
    deriv: Term
    mode: Mode
    source_type: Type
    result_type: Type
    arg: str = ROOT_VAR

    @property
    def arg_type(self) -> Type:
        return _translate(self.mode, self.source_type)[0]

    def expected_primal_type(self) -> Type:
        return _translate(self.mode, self.result_type)[0]

    def expected_deriv_type(self) -> LinFun:
        src = _translate(self.mode, self.source_type)[1]
        dst = _translate(self.mode, self.result_type)[1]
        if self.mode is Mode.FORWARD:
            return LinFun(src, dst)
        return LinFun(dst, src)

    def primal_program(self) -> Program:
        return Program(self.arg_type, self.primal, self.arg)

    def deriv_program(self) -> Program:
        return Program(self.arg_type, self.deriv, self.arg)


def _translate(mode: Mode, ty: Type) -> tuple[Type, Type]:
    return type_translate_fwd(ty) if mode is Mode.FORWARD else type_translate_rev(ty)


def forward_ad(c: Combinator, registry: Registry | None = None) -> AdOutput:
    macro = _Macro(Mode.FORWARD, registry or builtin_registry())
    primal, deriv = macro.fwd(c, Var(ROOT_VAR))
    logger.debug("forward AD: primal %d nodes, derivative %d nodes", term_size(primal), term_size(deriv))
    return AdOutput(primal, deriv, Mode.FORWARD, c.dom(), c.cod())


def reverse_ad(c: Combinator, registry: Registry | None = None) -> AdOutput:
    macro = _Macro(Mode.REVERSE, registry or builtin_registry())
    primal, deriv = macro.rev(c, Var(ROOT_VAR))
    logger.debug("reverse AD: primal %d nodes, derivative %d nodes", term_size(primal), term_size(deriv))
    return AdOutput(primal, deriv, Mode.REVERSE, c.dom(), c.cod())


def check_output(out: AdOutput, registry: Registry | None = None) -> None:
    """Re-typecheck emitted code against the translated types."""
    ctx = {out.arg: out.arg_type}
    for label, term, expected in (
        ("primal", out.primal, out.expected_primal_type()),
        ("derivative", out.deriv, out.expected_deriv_type()),
    ):
        try:
            found = typecheck_target(ctx, term, registry)
        except TypeCheckError as exc:
            raise InvariantViolation(f"{out.mode.value} {label} is ill-typed: {exc}") from exc
        if found != expected:
            raise InvariantViolation(
                f"{out.mode.value} {label} has type {found}, expected {expected}"
            )


class _Macro:
    def __init__(self, mode: Mode, registry: Registry):
        self.mode = mode
        self.registry = registry
        self.fresh = Fresh()

    def d1(self, ty: Type) -> Type:
        return _translate(self.mode, ty)[0]

    def d2(self, ty: Type) -> Type:
        return _translate(self.mode, ty)[1]

    # ---------------------------------------------------------------------
    # Forward mode
    # ---------------------------------------------------------------------

    def fwd(self, c: Combinator, x: Term) -> tuple[Term, Term]:
        match c:
            case Id(ty):
                return x, LId(self.d2(ty))
            case Comp(first, second):
                y = self.fresh("y")
                tp, td = self.fwd(first, x)
                sp, sd = self.fwd(second, Var(y))
                return Let(y, tp, sp), Let(y, tp, LComp(td, sd))
            case Terminal(ty):
                return UnitVal(), Zero(LinFun(self.d2(ty), UNIT))
            case PairC(left, right):
                lp, ld = self.fwd(left, x)
                rp, rd = self.fwd(right, x)
                return Pair(lp, rp), LPair(ld, rd)
            case FstC(left, right):
                return Fst(x), LFst(self.d2(left), self.d2(right))
            case SndC(left, right):
                return Snd(x), LSnd(self.d2(left), self.d2(right))
            case Ev(arg, res):
                y = self.fresh("y")
                fn_tangent = Fun(self.d1(arg), self.d2(res))
                deriv = Let(
                    y,
                    Snd(x),
                    Plus(
                        LComp(LFst(fn_tangent, self.d2(arg)), LEval(Var(y), self.d2(res))),
                        LComp(LSnd(fn_tangent, self.d2(arg)), Snd(App(Fst(x), Var(y)))),
                    ),
                )
                return Fst(App(Fst(x), Snd(x))), deriv
            case Curry(body, ctx, arg, res):
                y, z = self.fresh("y"), self.fresh("z")
                bp, bd = self.fwd(body, Var(z))
                env = Pair(x, Var(y))
                inject_arg = LPair(Zero(LinFun(self.d2(arg), self.d2(ctx))), LId(self.d2(arg)))
                primal = Lam(y, self.d1(arg), Let(z, env, Pair(bp, LComp(inject_arg, bd))))
                inject_ctx = LPair(LId(self.d2(ctx)), Zero(LinFun(self.d2(ctx), self.d2(arg))))
                deriv = LSwap(Lam(y, self.d1(arg), Let(z, env, LComp(inject_ctx, bd))))
                return primal, deriv
            case OpC(name, dom, _, params):
                spec = self.registry.lookup(name)
                inst = spec.instance(dom, params)
                return spec.primal_term(x, inst, self.fresh), spec.fwd_deriv(x, inst, self.fresh)
        raise InvariantViolation(f"not a combinator: {c!r}")

    # ---------------------------------------------------------------------
    # Reverse mode
    # ---------------------------------------------------------------------

    def rev(self, c: Combinator, x: Term) -> tuple[Term, Term]:
        match c:
            case Id(ty):
                return x, LId(self.d2(ty))
            case Comp(first, second):
                y = self.fresh("y")
                tp, td = self.rev(first, x)
                sp, sd = self.rev(second, Var(y))
                return Let(y, tp, sp), Let(y, tp, LComp(sd, td))
            case Terminal(ty):
                return UnitVal(), Zero(LinFun(UNIT, self.d2(ty)))
            case PairC(left, right):
                lp, ld = self.rev(left, x)
                rp, rd = self.rev(right, x)
                lt, rt = self.d2(left.cod()), self.d2(right.cod())
                deriv = Plus(LComp(LFst(lt, rt), ld), LComp(LSnd(lt, rt), rd))
                return Pair(lp, rp), deriv
            case FstC(left, right):
                l2, r2 = self.d2(left), self.d2(right)
                return Fst(x), LPair(LId(l2), Zero(LinFun(l2, r2)))
            case SndC(left, right):
                l2, r2 = self.d2(left), self.d2(right)
                return Snd(x), LPair(Zero(LinFun(r2, l2)), LId(r2))
            case Ev(arg, res):
                y = self.fresh("y")
                deriv = Let(y, Snd(x), LPair(LSing(Var(y), self.d2(res)), Snd(App(Fst(x), Var(y)))))
                return Fst(App(Fst(x), Snd(x))), deriv
            case Curry(body, ctx, arg, res):
                y, z = self.fresh("y"), self.fresh("z")
                bp, bd = self.rev(body, Var(z))
                env = Pair(x, Var(y))
                ctx2, arg2 = self.d2(ctx), self.d2(arg)
                primal = Lam(y, self.d1(arg), Let(z, env, Pair(bp, LComp(bd, LSnd(ctx2, arg2)))))
                family = Lam(y, self.d1(arg), Let(z, env, bd))
                deriv = LComp(LCurryInv(family, Prod(ctx2, arg2)), LFst(ctx2, arg2))
                return primal, deriv
            case OpC(name, dom, _, params):
                spec = self.registry.lookup(name)
                inst = spec.instance(dom, params)
                return spec.primal_term(x, inst, self.fresh), spec.rev_deriv(x, inst, self.fresh)
        raise InvariantViolation(f"not a combinator: {c!r}")
