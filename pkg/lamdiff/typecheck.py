"""Syntax-directed typecheckers for source and target terms."""

from __future__ import annotations

from collections.abc import Mapping

from lamdiff.errors import (
    LinearityShapeError,
    ShapeError,
    TypeCheckError,
    TypeMismatch,
    UnboundVariable,
)
from lamdiff.primitives import Registry, builtin_registry
from lamdiff.syntax import (
    App,
    Fst,
    Lam,
    LApp,
    LComp,
    LCurryInv,
    LEval,
    LFst,
    LId,
    LOp,
    LPair,
    LSing,
    LSnd,
    LSwap,
    Let,
    Op,
    Pair,
    Plus,
    SOURCE_NODES,
    Snd,
    Term,
    UnitVal,
    Var,
    Zero,
)
from lamdiff.types import UNIT, Fun, LinFun, MapT, Prod, Real, Type, is_source_type

Context = Mapping[str, Type]


def typecheck_source(ctx: Context, term: Term, registry: Registry | None = None) -> Type:
    """Type of a source term; target-only constructs are rejected."""
    return _Checker(registry or builtin_registry(), target=False).infer(dict(ctx), term)


def typecheck_target(ctx: Context, term: Term, registry: Registry | None = None) -> Type:
    return _Checker(registry or builtin_registry(), target=True).infer(dict(ctx), term)


class _Checker:
    def __init__(self, registry: Registry, target: bool):
        self.registry = registry
        self.target = target

    def infer(self, ctx: dict[str, Type], term: Term) -> Type:
        if not self.target and not isinstance(term, SOURCE_NODES):
            raise TypeCheckError(
                f"{type(term).__name__} is not part of the source language", term.loc
            )
        match term:
            case Var(name):
                if name not in ctx:
                    raise UnboundVariable(name, term.loc)
                return ctx[name]
            case UnitVal():
                return UNIT
            case Pair(left, right):
                return Prod(self.infer(ctx, left), self.infer(ctx, right))
            case Fst(arg):
                return self._product(ctx, arg, term).left
            case Snd(arg):
                return self._product(ctx, arg, term).right
            case Lam(binder, binder_type, body):
                self._annotation(binder_type, term)
                return Fun(binder_type, self.infer({**ctx, binder: binder_type}, body))
            case App(fn, arg):
                fn_type = self.infer(ctx, fn)
                if not isinstance(fn_type, Fun):
                    raise TypeMismatch("a function", fn_type, term.loc)
                self._expect(ctx, arg, fn_type.dom)
                return fn_type.cod
            case Let(binder, bound, body):
                bound_type = self.infer(ctx, bound)
                return self.infer({**ctx, binder: bound_type}, body)
            case Op(name, arg, params):
                spec = self.registry.lookup(name, term.loc)
                arg_type = self.infer(ctx, arg)
                try:
                    inst = spec.instance(arg_type, params)
                except ShapeError as exc:
                    raise TypeMismatch(f"an argument for {name}", arg_type, term.loc) from exc
                return Real(inst.cod)
        return self._infer_target(ctx, term)

    def _infer_target(self, ctx: dict[str, Type], term: Term) -> Type:
        match term:
            case Zero(ty):
                return ty
            case Plus(left, right):
                ty = self.infer(ctx, left)
                self._expect(ctx, right, ty)
                return ty
            case LOp(name, arg, dims):
                spec = self.registry.lookup_linear(name, term.loc)
                param = self.infer(ctx, arg)
                try:
                    dom, cod = spec.typing(param, dims)
                except ShapeError as exc:
                    raise LinearityShapeError(str(exc), term.loc) from exc
                return LinFun(dom, cod)
            case LId(ty):
                return LinFun(ty, ty)
            case LComp(first, second):
                f = self._linfun(ctx, first, term)
                g = self._linfun(ctx, second, term)
                if f.cod != g.dom:
                    raise LinearityShapeError(
                        f"lcomp seam: {f.cod} does not match {g.dom}", term.loc
                    )
                return LinFun(f.dom, g.cod)
            case LApp(fn, arg):
                f = self._linfun(ctx, fn, term)
                self._expect(ctx, arg, f.dom)
                return f.cod
            case LSwap(body):
                dom, lin = self._linear_family(ctx, body, term)
                return LinFun(lin.dom, Fun(dom, lin.cod))
            case LEval(arg, result_type):
                return LinFun(Fun(self.infer(ctx, arg), result_type), result_type)
            case LSing(arg, value_type):
                return LinFun(value_type, MapT(self.infer(ctx, arg), value_type))
            case LCurryInv(body, result_type):
                dom, lin = self._linear_family(ctx, body, term)
                if lin.cod != result_type:
                    raise TypeMismatch(str(result_type), lin.cod, term.loc)
                return LinFun(MapT(dom, lin.dom), lin.cod)
            case LFst(left, right):
                return LinFun(Prod(left, right), left)
            case LSnd(left, right):
                return LinFun(Prod(left, right), right)
            case LPair(left, right):
                f = self._linfun(ctx, left, term)
                g = self._linfun(ctx, right, term)
                if f.dom != g.dom:
                    raise LinearityShapeError(
                        f"lpair domains differ: {f.dom} vs {g.dom}", term.loc
                    )
                return LinFun(f.dom, Prod(f.cod, g.cod))
        raise TypeCheckError(f"not a term: {term!r}")

    # -- helpers -------------------------------------------------------------

    def _annotation(self, ty: Type, term: Term) -> None:
        if not self.target and not is_source_type(ty):
            raise TypeCheckError(f"{ty} is not a source type", term.loc)

    def _expect(self, ctx, term: Term, expected: Type) -> None:
        found = self.infer(ctx, term)
        if found != expected:
            raise TypeMismatch(str(expected), found, term.loc)

    def _product(self, ctx, arg: Term, term: Term) -> Prod:
        ty = self.infer(ctx, arg)
        if not isinstance(ty, Prod):
            raise TypeMismatch("a product", ty, term.loc)
        return ty

    def _linfun(self, ctx, arg: Term, term: Term) -> LinFun:
        ty = self.infer(ctx, arg)
        if not isinstance(ty, LinFun):
            raise LinearityShapeError(f"expected a linear function, found {ty}", term.loc)
        return ty

    def _linear_family(self, ctx, arg: Term, term: Term) -> tuple[Type, LinFun]:
        ty = self.infer(ctx, arg)
        match ty:
            case Fun(dom, LinFun() as lin):
                return dom, lin
        raise LinearityShapeError(
            f"expected a function into linear functions, found {ty}", term.loc
        )
