"""Point-free categorical-combinator IR.

`elaborate` compiles a source term in a typing context to a combinator whose
domain is the packed context; `reify` turns a combinator back into a lambda
term. Contexts pack left-nested with the newest binding rightmost,
`((t1 x t2) x t3)`; a context holding a single variable is packed as that
variable's type, and the empty context as unit.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from lamdiff.errors import InvariantViolation, TypeCheckError, UnboundVariable
from lamdiff.names import Fresh
from lamdiff.primitives import Registry, builtin_registry
from lamdiff.syntax import (
    App,
    Fst,
    Lam,
    Let,
    Op,
    Pair,
    Snd,
    Term,
    UnitVal,
    Var,
)
from lamdiff.typecheck import typecheck_source
from lamdiff.types import UNIT, Fun, Prod, Real, Type


@dataclass(frozen=True)
class Id:
    ty: Type

    def dom(self) -> Type:
        return self.ty

    def cod(self) -> Type:
        return self.ty


@dataclass(frozen=True)
class Comp:
    """`first ; second`: run `first`, then `second`."""

    first: Combinator
    second: Combinator

    def dom(self) -> Type:
        return self.first.dom()

    def cod(self) -> Type:
        return self.second.cod()


@dataclass(frozen=True)
class Terminal:
    ty: Type

    def dom(self) -> Type:
        return self.ty

    def cod(self) -> Type:
        return UNIT


@dataclass(frozen=True)
class PairC:
    left: Combinator
    right: Combinator

    def dom(self) -> Type:
        return self.left.dom()

    def cod(self) -> Type:
        return Prod(self.left.cod(), self.right.cod())


@dataclass(frozen=True)
class FstC:
    left: Type
    right: Type

    def dom(self) -> Type:
        return Prod(self.left, self.right)

    def cod(self) -> Type:
        return self.left


@dataclass(frozen=True)
class SndC:
    left: Type
    right: Type

    def dom(self) -> Type:
        return Prod(self.left, self.right)

    def cod(self) -> Type:
        return self.right


@dataclass(frozen=True)
class Ev:
    arg: Type
    res: Type

    def dom(self) -> Type:
        return Prod(Fun(self.arg, self.res), self.arg)

    def cod(self) -> Type:
        return self.res


@dataclass(frozen=True)
class Curry:
    """`body : ctx x arg -> res` curried to `ctx -> (arg -> res)`."""

    body: Combinator
    ctx: Type
    arg: Type
    res: Type

    def dom(self) -> Type:
        return self.ctx

    def cod(self) -> Type:
        return Fun(self.arg, self.res)


@dataclass(frozen=True)
class OpC:
    name: str
    op_dom: Type
    op_cod: Type
    params: tuple[float, ...] = ()

    def dom(self) -> Type:
        return self.op_dom

    def cod(self) -> Type:
        return self.op_cod


Combinator = Id | Comp | Terminal | PairC | FstC | SndC | Ev | Curry | OpC


def check_seams(c: Combinator) -> None:
    """Raise InvariantViolation if some composite does not line up."""
    match c:
        case Comp(first, second):
            check_seams(first)
            check_seams(second)
            if first.cod() != second.dom():
                raise InvariantViolation(f"seam mismatch: {first.cod()} ; {second.dom()}")
        case PairC(left, right):
            check_seams(left)
            check_seams(right)
            if left.dom() != right.dom():
                raise InvariantViolation(f"pairing over {left.dom()} and {right.dom()}")
        case Curry(body, ctx, arg, res):
            check_seams(body)
            if body.dom() != Prod(ctx, arg) or body.cod() != res:
                raise InvariantViolation("curry annotation does not match its body")


# ---------------------------------------------------------------------------
# Elaboration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Env:
    entries: tuple[tuple[str, Type], ...]
    unit_base: bool

    def packed(self) -> Type:
        return self._packed(len(self.entries))

    def _packed(self, k: int) -> Type:
        if k == 0:
            return UNIT
        if k == 1 and not self.unit_base:
            return self.entries[0][1]
        return Prod(self._packed(k - 1), self.entries[k - 1][1])

    def extend(self, name: str, ty: Type) -> _Env:
        return _Env(self.entries + ((name, ty),), self.unit_base)

    def lookup(self, name: str, location=None) -> Combinator:
        for i in range(len(self.entries) - 1, -1, -1):
            if self.entries[i][0] == name:
                return self._lookup(i, len(self.entries))
        raise UnboundVariable(name, location)

    def _lookup(self, i: int, k: int) -> Combinator:
        if i == k - 1:
            if k == 1 and not self.unit_base:
                return Id(self.entries[0][1])
            return SndC(self._packed(k - 1), self.entries[k - 1][1])
        proj = FstC(self._packed(k - 1), self.entries[k - 1][1])
        return Comp(proj, self._lookup(i, k - 1))


def elaborate(ctx: Mapping[str, Type], term: Term, registry: Registry | None = None) -> Combinator:
    """Compile `term` to a combinator from the packed `ctx` to its type.

    Context entries pack in insertion order.
    """
    registry = registry or builtin_registry()
    typecheck_source(ctx, term, registry)
    env = _Env(tuple(ctx.items()), unit_base=not ctx)
    return _elab(env, term, registry)


def _elab(env: _Env, term: Term, registry: Registry) -> Combinator:
    match term:
        case Var(name):
            return env.lookup(name, term.loc)
        case UnitVal():
            return Terminal(env.packed())
        case Pair(left, right):
            return PairC(_elab(env, left, registry), _elab(env, right, registry))
        case Fst(arg):
            c = _elab(env, arg, registry)
            prod = c.cod()
            return Comp(c, FstC(prod.left, prod.right))
        case Snd(arg):
            c = _elab(env, arg, registry)
            prod = c.cod()
            return Comp(c, SndC(prod.left, prod.right))
        case Lam(binder, binder_type, body):
            c = _elab(env.extend(binder, binder_type), body, registry)
            return Curry(c, env.packed(), binder_type, c.cod())
        case App(fn, arg):
            f = _elab(env, fn, registry)
            fn_type = f.cod()
            return Comp(PairC(f, _elab(env, arg, registry)), Ev(fn_type.dom, fn_type.cod))
        case Let(binder, bound, body):
            b = _elab(env, bound, registry)
            s = _elab(env.extend(binder, b.cod()), body, registry)
            return Comp(PairC(Id(env.packed()), b), s)
        case Op(name, arg, params):
            a = _elab(env, arg, registry)
            inst = registry.lookup(name, term.loc).instance(a.cod(), params)
            return Comp(a, OpC(name, a.cod(), Real(inst.cod), params))
    raise TypeCheckError(f"{type(term).__name__} cannot be elaborated", term.loc)


# ---------------------------------------------------------------------------
# Reification
# ---------------------------------------------------------------------------

def reify(c: Combinator, fresh: Fresh | None = None) -> Lam:
    """A lambda term `λx:dom(c). ...` denoting `c`."""
    fresh = fresh or Fresh()
    x = fresh("x")
    return Lam(x, c.dom(), _reify(c, Var(x), fresh))


def _reify(c: Combinator, x: Term, fresh: Fresh) -> Term:
    match c:
        case Id():
            return x
        case Comp(first, second):
            y = fresh("y")
            return Let(y, _reify(first, x, fresh), _reify(second, Var(y), fresh))
        case Terminal():
            return UnitVal()
        case PairC(left, right):
            return Pair(_reify(left, x, fresh), _reify(right, x, fresh))
        case FstC():
            return Fst(x)
        case SndC():
            return Snd(x)
        case Ev():
            return App(Fst(x), Snd(x))
        case Curry(body, _, arg, _):
            y, z = fresh("y"), fresh("z")
            return Lam(y, arg, Let(z, Pair(x, Var(y)), _reify(body, Var(z), fresh)))
        case OpC(name, _, _, params):
            return Op(name, x, params)
    raise InvariantViolation(f"not a combinator: {c!r}")
