"""Big-step evaluator working on terms.

Evaluation is call-by-name in spirit: linear-function terms stay unevaluated
until applied, and `applin` distributes over `zero` and `+` before looking at
its operands. Function arguments and pair components are evaluated before
substitution. Normal forms are:

* `(const ...)` at real types, `unit`, and pairs of normal forms;
* lambdas, `zero` and sums at function and linear-function types, and the
  linear constructors themselves;
* at map types, `zero` or a left-nested sum of `(lapp (lsing k T) v)` entries.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from lamdiff.errors import NoRuleApplies, WidthMismatch
from lamdiff.names import substitute
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
    Snd,
    Term,
    UnitVal,
    Var,
    Zero,
    const,
    is_const,
)
from lamdiff.typecheck import typecheck_target
from lamdiff.types import REAL1, Fun, MapT, Prod, Real, Type, Unit


def eval_symbolic(term: Term, registry: Registry | None = None) -> Term:
    """Normal form of a closed, well-typed target term."""
    return SymbolicEvaluator(registry).eval(term)


def as_array(nf: Term) -> np.ndarray:
    if not is_const(nf):
        raise NoRuleApplies(f"expected a constant array, found {type(nf).__name__}")
    return np.array(nf.params, dtype=np.float64)


def _to_ground(nf: Term):
    match nf:
        case UnitVal():
            return ()
        case Pair(left, right):
            return (_to_ground(left), _to_ground(right))
    return as_array(nf)


def _from_ground(ground) -> Term:
    if isinstance(ground, np.ndarray):
        return const(ground)
    if ground == ():
        return UnitVal()
    return Pair(_from_ground(ground[0]), _from_ground(ground[1]))


def _is_map(nf: Term) -> bool:
    match nf:
        case Zero(MapT()):
            return True
        case LApp(LSing(), _):
            return True
        case Plus(left, _):
            return _is_map(left)
    return False


def _map_entries(nf: Term) -> list[Term]:
    match nf:
        case Zero():
            return []
        case Plus(left, right):
            return _map_entries(left) + _map_entries(right)
    return [nf]


class SymbolicEvaluator:
    def __init__(self, registry: Registry | None = None):
        self.registry = registry or builtin_registry()
        # id(family) -> (family, type)
        self._family_types: dict[int, tuple[Term, Fun]] = {}

    def zero(self, ty: Type) -> Term:
        match ty:
            case Real(n):
                return const(np.zeros(n))
            case Unit():
                return UnitVal()
            case Prod(left, right):
                return Pair(self.zero(left), self.zero(right))
        return Zero(ty)

    def plus(self, a: Term, b: Term) -> Term:
        if is_const(a) and is_const(b):
            x, y = as_array(a), as_array(b)
            if x.size != y.size:
                raise WidthMismatch(x.size, y.size)
            return const(x + y)
        match a, b:
            case UnitVal(), UnitVal():
                return UnitVal()
            case Pair(), Pair():
                return Pair(self.plus(a.left, b.left), self.plus(a.right, b.right))
        if _is_map(a) or _is_map(b):
            entries = _map_entries(a) + _map_entries(b)
            if not entries:
                return a
            return reduce(Plus, entries)
        return Plus(a, b)

    def eval(self, term: Term) -> Term:
        match term:
            case Var(name):
                raise NoRuleApplies(f"free variable '{name}'")
            case UnitVal() | Lam():
                return term
            case Op(name, arg, params):
                return self._op(name, arg, params)
            case Pair(left, right):
                return Pair(self.eval(left), self.eval(right))
            case Fst(arg):
                return self._pair(arg).left
            case Snd(arg):
                return self._pair(arg).right
            case App(fn, arg):
                return self.apply(self.eval(fn), self.eval(arg))
            case Let(binder, bound, body):
                return self.eval(substitute(body, binder, self.eval(bound)))
            case Zero(ty):
                return self.zero(ty)
            case Plus(left, right):
                return self.plus(self.eval(left), self.eval(right))
            case LApp(fn, arg):
                return self.applin(self.eval(fn), self.eval(arg))
            case LOp() | LId() | LComp() | LSwap() | LEval() | LSing() | LCurryInv() | LFst() | LSnd() | LPair():
                return term
        raise NoRuleApplies(f"no rule for {type(term).__name__}")

    def apply(self, fn: Term, arg: Term) -> Term:
        """Apply a function normal form to an argument normal form."""
        match fn:
            case Lam(binder, _, body):
                return self.eval(substitute(body, binder, arg))
            case Zero(Fun(_, cod)):
                return self.zero(cod)
            case Plus(left, right):
                return self.plus(self.apply(left, arg), self.apply(right, arg))
        raise NoRuleApplies(f"cannot apply {type(fn).__name__}")

    def applin(self, fn: Term, arg: Term) -> Term:
        """Apply a linear-function normal form to an argument normal form."""
        match fn:
            case Zero(ty):
                return self.zero(ty.cod)
            case Plus(left, right):
                return self.plus(self.applin(left, arg), self.applin(right, arg))
            case LOp(name, param, dims):
                return self._linear_op(name, self.eval(param), arg, dims)
            case LId():
                return arg
            case LComp(first, second):
                return self.applin(self.eval(second), self.applin(self.eval(first), arg))
            case LFst():
                return self._expect_pair(arg).left
            case LSnd():
                return self._expect_pair(arg).right
            case LPair(left, right):
                return Pair(self.applin(self.eval(left), arg), self.applin(self.eval(right), arg))
            case LEval(point, _):
                return self.apply(arg, self.eval(point))
            case LSwap(family):
                family_type = self._family_type(family)
                return Lam("w", family_type.dom, LApp(App(family, Var("w")), arg))
            case LSing(key, value_type):
                return LApp(LSing(self.eval(key), value_type), arg)
            case LCurryInv(family, result_type):
                return self._fold(fn, family, arg, result_type)
        raise NoRuleApplies(f"cannot apply {type(fn).__name__} linearly")

    # -- helpers -------------------------------------------------------------

    def _family_type(self, family: Term) -> Fun:
        cached = self._family_types.get(id(family))
        if cached is None or cached[0] is not family:
            cached = (family, typecheck_target({}, family, self.registry))
            self._family_types[id(family)] = cached
        return cached[1]

    def _fold(self, fn: Term, family: Term, m: Term, result_type: Type) -> Term:
        match m:
            case Zero():
                return self.zero(result_type)
            case Plus(left, right):
                return self.plus(self.applin(fn, left), self.applin(fn, right))
            case LApp(LSing(key), val):
                return self.applin(self.eval(App(family, key)), val)
        raise NoRuleApplies("lcurryinv expects a map normal form")

    def _pair(self, term: Term) -> Pair:
        return self._expect_pair(self.eval(term))

    @staticmethod
    def _expect_pair(nf: Term) -> Pair:
        if not isinstance(nf, Pair):
            raise NoRuleApplies(f"expected a pair, found {type(nf).__name__}")
        return nf

    def _op(self, name: str, arg: Term, params: tuple[float, ...]) -> Term:
        spec = self.registry.lookup(name)
        nf = self.eval(arg)
        if spec.higher_order:
            fn, v = self._expect_pair(nf).left, as_array(nf.right)
            return const(spec.semantics(lambda a: as_array(self.apply(fn, const(a))), v))
        match spec.arity:
            case 0:
                args = ()
            case 1:
                args = (as_array(nf),)
            case _:
                pair = self._expect_pair(nf)
                args = (as_array(pair.left), as_array(pair.right))
        return const(np.asarray(spec.semantics(args, params), dtype=np.float64))

    def _linear_op(self, name: str, param: Term, arg: Term, dims: tuple[int, ...]) -> Term:
        spec = self.registry.lookup_linear(name)
        if not spec.higher_order:
            return _from_ground(spec.semantics(_to_ground(param), _to_ground(arg), dims))
        match name:
            case "lmapapply":
                v = as_array(param)
                parts = [as_array(self.apply(arg, const(v[i : i + 1]))) for i in range(v.size)]
                return const(np.concatenate([np.zeros(0)] + parts))
            case "lzipwith":
                pair = self._expect_pair(param)
                v, w = as_array(pair.right), as_array(arg)
                if v.size != w.size:
                    raise WidthMismatch(v.size, w.size)
                out = [np.zeros(0)]
                for i in range(v.size):
                    slope = self._expect_pair(self.apply(pair.left, const(v[i : i + 1]))).right
                    out.append(as_array(self.applin(slope, const(w[i : i + 1]))))
                return const(np.concatenate(out))
            case "lzip":
                v, w = as_array(param), as_array(arg)
                if v.size != w.size:
                    raise WidthMismatch(v.size, w.size)
                if v.size == 0:
                    return Zero(MapT(REAL1, REAL1))
                return reduce(
                    Plus,
                    [LApp(LSing(const(v[i : i + 1]), REAL1), const(w[i : i + 1])) for i in range(v.size)],
                )
        raise NoRuleApplies(f"no rule for linear operation '{name}'")
