"""Definitional evaluator: environments, closures, call-by-value.

Linear functions evaluate to Python callables and `Map` values to tuples of
pairs, following the reference implementation of the linear API:
`lid = λx.x`, `lsing t = λx.[(t, x)]`, `lcurryinv t = fold (t key val + acc)`.
"""

from __future__ import annotations

from collections.abc import Mapping
from functools import cache

import numpy as np

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
from lamdiff.errors import InvariantViolation, ShapeMismatch, UnboundVariable, WidthMismatch
from lamdiff.primitives import OpSpec, Registry, builtin_registry
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
    Snd,
    Term,
    UnitVal,
    Var,
    Zero,
)
from lamdiff.types import Fun, LinFun, MapT, Prod, Real, Type, Unit
from lamdiff.values import (
    UNIT_V,
    Builtin,
    Closure,
    MapV,
    PairV,
    RealVec,
    UnitV,
    Value,
    from_ground,
    linear,
    to_ground,
)

Env = Mapping[str, Value]


def zero_of(ty: Type) -> Value:
    """The additive unit at `ty`."""
    match ty:
        case Real(n):
            return RealVec(np.zeros(n))
        case Unit():
            return UNIT_V
        case Prod(left, right):
            return PairV(zero_of(left), zero_of(right))
        case Fun(_, cod):
            result = zero_of(cod)
            return Builtin(lambda _: result)
        case LinFun(_, cod):
            result = zero_of(cod)
            return linear(lambda _: result)
        case MapT():
            return MapV(())
    raise InvariantViolation(f"no zero at {ty!r}")


class Evaluator:
    def __init__(self, registry: Registry | None = None):
        self.registry = registry or builtin_registry()

    # ---------------------------------------------------------------------
    # Monoid structure and application
    # ---------------------------------------------------------------------

    def plus(self, a: Value, b: Value) -> Value:
        match a, b:
            case RealVec(x), RealVec(y):
                if x.size != y.size:
                    raise WidthMismatch(x.size, y.size)
                return RealVec(x + y)
            case UnitV(), UnitV():
                return UNIT_V
            case PairV(), PairV():
                return PairV(self.plus(a.left, b.left), self.plus(a.right, b.right))
            case MapV(), MapV():
                return MapV(a.entries + b.entries)
            case (Closure() | Builtin()), (Closure() | Builtin()):
                return Builtin(
                    lambda v: self.plus(self.apply(a, v), self.apply(b, v)),
                    linear=a.linear and b.linear,
                )
        raise ShapeMismatch(f"cannot add {type(a).__name__} and {type(b).__name__}")

    def apply(self, fn: Value, arg: Value) -> Value:
        match fn:
            case Closure(binder, body, env):
                return self.eval({**env, binder: arg}, body)
            case Builtin(f):
                return f(arg)
        raise InvariantViolation(f"applying a non-function {type(fn).__name__}")

    # ---------------------------------------------------------------------
    # Terms
    # ---------------------------------------------------------------------

    def eval(self, env: Env, term: Term) -> Value:
        match term:
            case Var(name):
                try:
                    return env[name]
                except KeyError:
                    raise UnboundVariable(name, term.loc) from None
            case UnitVal():
                return UNIT_V
            case Pair(left, right):
                return PairV(self.eval(env, left), self.eval(env, right))
            case Fst(arg):
                return self.eval(env, arg).left
            case Snd(arg):
                return self.eval(env, arg).right
            case Lam(binder, _, body):
                return Closure(binder, body, dict(env))
            case App(fn, arg):
                return self.apply(self.eval(env, fn), self.eval(env, arg))
            case Let(binder, bound, body):
                return self.eval({**env, binder: self.eval(env, bound)}, body)
            case Op(name, arg, params):
                spec = self.registry.lookup(name, term.loc)
                return self.run_op(spec, self.eval(env, arg), params)
            case Zero(ty):
                return zero_of(ty)
            case Plus(left, right):
                return self.plus(self.eval(env, left), self.eval(env, right))
            case LOp(name, arg, dims):
                return self.linear_op(name, self.eval(env, arg), dims)
            case LId():
                return linear(lambda v: v)
            case LComp(first, second):
                f, g = self.eval(env, first), self.eval(env, second)
                return linear(lambda v: self.apply(g, self.apply(f, v)))
            case LApp(fn, arg):
                return self.apply(self.eval(env, fn), self.eval(env, arg))
            case LSwap(body):
                family = self.eval(env, body)
                return linear(
                    lambda v: Builtin(lambda s: self.apply(self.apply(family, s), v))
                )
            case LEval(arg, _):
                point = self.eval(env, arg)
                return linear(lambda g: self.apply(g, point))
            case LSing(arg, _):
                key = self.eval(env, arg)
                return linear(lambda v: MapV(((key, v),)))
            case LCurryInv(body, result_type):
                family = self.eval(env, body)
                return linear(lambda m: self._fold(family, m, result_type))
            case LFst():
                return linear(lambda p: p.left)
            case LSnd():
                return linear(lambda p: p.right)
            case LPair(left, right):
                f, g = self.eval(env, left), self.eval(env, right)
                return linear(lambda v: PairV(self.apply(f, v), self.apply(g, v)))
        raise InvariantViolation(f"cannot evaluate {term!r}")

    def _fold(self, family: Value, m: MapV, result_type: Type) -> Value:
        if not m.entries:
            return zero_of(result_type)
        acc = None
        for key, val in m.entries:
            term = self.apply(self.apply(family, key), val)
            acc = term if acc is None else self.plus(acc, term)
        return acc

    # ---------------------------------------------------------------------
    # Operations
    # ---------------------------------------------------------------------

    def run_op(self, spec: OpSpec, arg: Value, params: tuple[float, ...]) -> RealVec:
        if spec.higher_order:
            fn = arg.left
            return RealVec(
                spec.semantics(lambda a: self.apply(fn, RealVec(a)).data, arg.right.data)
            )
        match spec.arity:
            case 0:
                args = ()
            case 1:
                args = (arg.data,)
            case _:
                args = (arg.left.data, arg.right.data)
        return RealVec(np.asarray(spec.semantics(args, params), dtype=np.float64))

    def linear_op(self, name: str, param: Value, dims: tuple[int, ...]) -> Builtin:
        spec = self.registry.lookup_linear(name)
        if not spec.higher_order:
            p = to_ground(param)
            return linear(lambda y: from_ground(spec.semantics(p, to_ground(y), dims)))
        match name:
            case "lmapapply":
                v = param.data
                return linear(
                    lambda g: RealVec(
                        np.concatenate(
                            [np.zeros(0)] + [self.apply(g, RealVec(v[i : i + 1])).data for i in range(v.size)]
                        )
                    )
                )
            case "lzipwith":
                fn, v = param.left, param.right.data
                return linear(lambda w: RealVec(self._zip_with(fn, v, w.data)))
            case "lzip":
                v = param.data
                return linear(lambda w: self._zip(v, w.data))
        raise InvariantViolation(f"no evaluator rule for linear operation '{name}'")

    def _zip_with(self, fn: Value, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        if v.size != w.size:
            raise WidthMismatch(v.size, w.size)
        out = [np.zeros(0)]
        for i in range(v.size):
            slope = self.apply(fn, RealVec(v[i : i + 1])).right
            out.append(self.apply(slope, RealVec(w[i : i + 1])).data)
        return np.concatenate(out)

    @staticmethod
    def _zip(v: np.ndarray, w: np.ndarray) -> MapV:
        if v.size != w.size:
            raise WidthMismatch(v.size, w.size)
        return MapV(
            tuple((RealVec(v[i : i + 1]), RealVec(w[i : i + 1])) for i in range(v.size))
        )

    # ---------------------------------------------------------------------
    # Combinators
    # ---------------------------------------------------------------------

    def run(self, c: Combinator, value: Value) -> Value:
        """Standard cartesian-closed semantics of a combinator."""
        match c:
            case Id():
                return value
            case Comp(first, second):
                return self.run(second, self.run(first, value))
            case Terminal():
                return UNIT_V
            case PairC(left, right):
                return PairV(self.run(left, value), self.run(right, value))
            case FstC():
                return value.left
            case SndC():
                return value.right
            case Ev():
                return self.apply(value.left, value.right)
            case Curry(body):
                return Builtin(lambda y: self.run(body, PairV(value, y)))
            case OpC(name, _, _, params):
                return self.run_op(self.registry.lookup(name), value, params)
        raise InvariantViolation(f"not a combinator: {c!r}")


@cache
def _default() -> Evaluator:
    return Evaluator()


def eval_definitional(env: Env, term: Term, registry: Registry | None = None) -> Value:
    evaluator = Evaluator(registry) if registry is not None else _default()
    return evaluator.eval(env, term)


def plus_values(a: Value, b: Value) -> Value:
    """Value-directed monoid addition; the shapes of `a` and `b` pick the rule."""
    return _default().plus(a, b)


def apply_value(fn: Value, arg: Value) -> Value:
    return _default().apply(fn, arg)


def run_combinator(c: Combinator, value: Value, registry: Registry | None = None) -> Value:
    evaluator = Evaluator(registry) if registry is not None else _default()
    return evaluator.run(c, value)
