"""Registry of primitive operations and of the linear operations their
derivatives are written with.

A smooth operation `op : Dom(op) -> real m` has a domain of arity 0 (unit),
1 (`real n`) or 2 (`prod (real n1) (real n2)`). Its forward derivative is a
term of type `linfun Dom(op) (real m)` in the primal argument `x`, and its
reverse derivative a term of type `linfun (real m) Dom(op)`.

To add an operation, build an `OpSpec` with its semantics and both derivative
builders and pass it to `Registry.extended`; the linearity, transpose and
finite-difference checks in the test suite pick it up from `example_widths`.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from functools import cache
from typing import Callable, Iterator

import numpy as np

from lamdiff.errors import ShapeError, UnknownOp
from lamdiff.names import Fresh
from lamdiff.syntax import (
    App,
    Fst,
    Lam,
    LComp,
    LFst,
    LId,
    LOp,
    LPair,
    LSnd,
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
)
from lamdiff.types import REAL1, UNIT, Fun, LinFun, MapT, Prod, Real, Type, Unit

Ground = np.ndarray | tuple


@dataclass(frozen=True)
class OpInstance:
    """An operation used at concrete argument widths."""

    name: str
    widths: tuple[int, ...]
    params: tuple[float, ...]
    cod: int

    @property
    def dom(self) -> Type:
        return domain_type(self.widths)


DerivBuilder = Callable[[Term, OpInstance, Fresh], Term]


@dataclass(frozen=True)
class OpSpec:
    name: str
    arity: int
    codomain: Callable[[tuple[int, ...], tuple[float, ...]], int]
    semantics: Callable
    fwd_deriv: DerivBuilder
    rev_deriv: DerivBuilder
    example_widths: tuple[int, ...] = ()
    higher_order: bool = False
    primal: DerivBuilder | None = None
    description: str = ""

    def instance(self, arg_type: Type, params: tuple[float, ...] = ()) -> OpInstance:
        """Check `arg_type` against the operation's domain; raises ShapeError."""
        if self.higher_order:
            match arg_type:
                case Prod(Fun(Real(1), Real(1)), Real(n)):
                    return OpInstance(self.name, (n,), params, self.codomain((n,), params))
            raise ShapeError(f"{self.name} expects (prod (fun (real 1) (real 1)) (real n))")
        widths = _widths(self.arity, arg_type)
        if widths is None:
            raise ShapeError(f"{self.name} expects an argument of arity {self.arity}, got {arg_type}")
        return OpInstance(self.name, widths, params, self.codomain(widths, params))

    def primal_term(self, x: Term, inst: OpInstance, fresh: Fresh) -> Term:
        if self.primal is not None:
            return self.primal(x, inst, fresh)
        return Op(self.name, x, inst.params)


@dataclass(frozen=True)
class LinOpSpec:
    """A linear operation `lop(p) : linfun dom cod` with parameter `p`."""

    name: str
    typing: Callable[[Type, tuple[int, ...]], tuple[Type, Type]]
    semantics: Callable[[Ground, Ground, tuple[int, ...]], Ground] | None = None
    higher_order: bool = False


class Registry(Mapping[str, OpSpec]):
    """Immutable name -> OpSpec mapping with the linear operations alongside."""

    def __init__(self, ops: Mapping[str, OpSpec], linear: Mapping[str, LinOpSpec]):
        self._ops = dict(ops)
        self.linear: Mapping[str, LinOpSpec] = dict(linear)

    def __getitem__(self, name: str) -> OpSpec:
        return self._ops[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._ops)

    def __len__(self) -> int:
        return len(self._ops)

    def lookup(self, name: str, location=None) -> OpSpec:
        try:
            return self._ops[name]
        except KeyError:
            raise UnknownOp(name, location) from None

    def lookup_linear(self, name: str, location=None) -> LinOpSpec:
        try:
            return self.linear[name]
        except KeyError:
            raise UnknownOp(name, location) from None

    def extended(self, *specs: OpSpec | LinOpSpec) -> Registry:
        ops, linear = dict(self._ops), dict(self.linear)
        for spec in specs:
            if isinstance(spec, LinOpSpec):
                linear[spec.name] = spec
            else:
                ops[spec.name] = spec
        return Registry(ops, linear)


def domain_type(widths: tuple[int, ...]) -> Type:
    if not widths:
        return UNIT
    if len(widths) == 1:
        return Real(widths[0])
    return Prod(Real(widths[0]), Real(widths[1]))


def _widths(arity: int, ty: Type) -> tuple[int, ...] | None:
    match arity, ty:
        case 0, Unit():
            return ()
        case 1, Real(n):
            return (n,)
        case 2, Prod(Real(n1), Real(n2)):
            return (n1, n2)
    return None


# ---------------------------------------------------------------------------
# Linear operations
# ---------------------------------------------------------------------------

def _real_param(param: Type, name: str) -> int:
    if not isinstance(param, Real):
        raise ShapeError(f"{name} takes a real-array parameter, got {param}")
    return param.n


def _dim(dims: tuple[int, ...], name: str) -> int:
    if len(dims) != 1 or dims[0] < 1:
        raise ShapeError(f"{name} needs one positive static width, got {dims}")
    return dims[0]


def _unit_param(param: Type, name: str) -> None:
    if param != UNIT:
        raise ShapeError(f"{name} takes a unit parameter, got {param}")


def _typing_lmul(p, dims):
    n = _real_param(p, "lmul")
    return Real(n), Real(n)


def _typing_ldot(p, dims):
    return Real(_real_param(p, "ldot")), REAL1


def _typing_lrescale(p, dims):
    return REAL1, Real(_real_param(p, "lrescale"))


def _typing_lscale(p, dims):
    if _real_param(p, "lscale") != 1:
        raise ShapeError("lscale takes a (real 1) parameter")
    n = _dim(dims, "lscale")
    return Real(n), Real(n)


def _typing_lneg(p, dims):
    _unit_param(p, "lneg")
    n = _dim(dims, "lneg")
    return Real(n), Real(n)


def _typing_lsum(p, dims):
    _unit_param(p, "lsum")
    return Real(_dim(dims, "lsum")), REAL1


def _typing_lbroadcast(p, dims):
    _unit_param(p, "lbroadcast")
    return REAL1, Real(_dim(dims, "lbroadcast"))


def _typing_lflip(p, dims):
    _unit_param(p, "lflip")
    return Real(2), Real(2)


def _matrix_dims(p, dims, name) -> tuple[int, int]:
    size = _real_param(p, name)
    n = _dim(dims, name)
    if size % n:
        raise ShapeError(f"{name}: matrix of {size} entries has no {n} rows")
    return n, size // n


def _typing_lmatvec(p, dims):
    n, m = _matrix_dims(p, dims, "lmatvec")
    return Real(m), Real(n)


def _typing_lmatvec_t(p, dims):
    n, m = _matrix_dims(p, dims, "lmatvec_t")
    return Real(n), Real(m)


def _typing_lmatvec_right(p, dims):
    m = _real_param(p, "lmatvec_right")
    n = _dim(dims, "lmatvec_right")
    return Real(n * m), Real(n)


def _typing_louter(p, dims):
    m = _real_param(p, "louter")
    n = _dim(dims, "louter")
    return Real(n), Real(n * m)


def _typing_lmapapply(p, dims):
    return Fun(REAL1, REAL1), Real(_real_param(p, "lmapapply"))


def _typing_lzipwith(p, dims):
    match p:
        case Prod(Fun(Real(1), Prod(Real(1), LinFun(Real(1), Real(1)))), Real(n)):
            return Real(n), Real(n)
    raise ShapeError(f"lzipwith expects a transformed map argument, got {p}")


def _typing_lzip(p, dims):
    return Real(_real_param(p, "lzip")), MapT(REAL1, REAL1)


def _reshape(a: np.ndarray, n: int) -> np.ndarray:
    return a.reshape(n, a.size // n)


LINEAR_OPS: tuple[LinOpSpec, ...] = (
    LinOpSpec("lmul", _typing_lmul, lambda p, y, d: p * y),
    LinOpSpec("ldot", _typing_ldot, lambda p, y, d: np.array([np.dot(p, y)])),
    LinOpSpec("lrescale", _typing_lrescale, lambda p, y, d: y[0] * p),
    LinOpSpec("lscale", _typing_lscale, lambda p, y, d: p[0] * y),
    LinOpSpec("lneg", _typing_lneg, lambda p, y, d: -y),
    LinOpSpec("lsum", _typing_lsum, lambda p, y, d: np.array([np.sum(y)])),
    LinOpSpec("lbroadcast", _typing_lbroadcast, lambda p, y, d: np.full(d[0], y[0])),
    LinOpSpec("lflip", _typing_lflip, lambda p, y, d: y[::-1].copy()),
    LinOpSpec("lmatvec", _typing_lmatvec, lambda p, y, d: _reshape(p, d[0]) @ y),
    LinOpSpec("lmatvec_t", _typing_lmatvec_t, lambda p, y, d: _reshape(p, d[0]).T @ y),
    LinOpSpec("lmatvec_right", _typing_lmatvec_right, lambda p, y, d: _reshape(y, d[0]) @ p),
    LinOpSpec("louter", _typing_louter, lambda p, y, d: np.outer(y, p).ravel()),
    # applied by the evaluators, which own function application
    LinOpSpec("lmapapply", _typing_lmapapply, higher_order=True),
    LinOpSpec("lzipwith", _typing_lzipwith, higher_order=True),
    LinOpSpec("lzip", _typing_lzip, higher_order=True),
)


# ---------------------------------------------------------------------------
# Smooth operations
# ---------------------------------------------------------------------------

def _same_widths(widths, params):
    n1, n2 = widths
    if n1 != n2:
        raise ShapeError(f"operand widths differ: {n1} vs {n2}")
    return n1


def _elementwise(widths, params):
    return widths[0]


def _lop(name: str, arg: Term | None = None, *dims: int) -> LOp:
    return LOp(name, UnitVal() if arg is None else arg, tuple(dims))


def _proj_types(inst: OpInstance) -> tuple[Real, Real]:
    n1, n2 = inst.widths
    return Real(n1), Real(n2)


def _const_codomain(widths, params):
    if not params:
        raise ShapeError("const needs at least one value")
    return len(params)


def _const_fwd(x, inst, fresh):
    return Zero(LinFun(UNIT, Real(inst.cod)))


def _const_rev(x, inst, fresh):
    return Zero(LinFun(Real(inst.cod), UNIT))


def _const_primal(x, inst, fresh):
    return const(inst.params)


def _add_fwd(x, inst, fresh):
    a, b = _proj_types(inst)
    return Plus(LFst(a, b), LSnd(a, b))


def _add_rev(x, inst, fresh):
    return LPair(LId(Real(inst.cod)), LId(Real(inst.cod)))


def _sub_fwd(x, inst, fresh):
    a, b = _proj_types(inst)
    return Plus(LFst(a, b), LComp(LSnd(a, b), _lop("lneg", None, inst.cod)))


def _sub_rev(x, inst, fresh):
    return LPair(LId(Real(inst.cod)), _lop("lneg", None, inst.cod))


def _mul_fwd(x, inst, fresh):
    a, b = _proj_types(inst)
    return Plus(
        LComp(LSnd(a, b), _lop("lmul", Fst(x))),
        LComp(LFst(a, b), _lop("lmul", Snd(x))),
    )


def _mul_rev(x, inst, fresh):
    return LPair(_lop("lmul", Snd(x)), _lop("lmul", Fst(x)))


def _inner_codomain(widths, params):
    _same_widths(widths, params)
    return 1


def _inner_fwd(x, inst, fresh):
    a, b = _proj_types(inst)
    return Plus(
        LComp(LFst(a, b), _lop("ldot", Snd(x))),
        LComp(LSnd(a, b), _lop("ldot", Fst(x))),
    )


def _inner_rev(x, inst, fresh):
    return LPair(_lop("lrescale", Snd(x)), _lop("lrescale", Fst(x)))


def _rescale_codomain(widths, params):
    s, n = widths
    if s != 1:
        raise ShapeError(f"rescale takes a (real 1) scalar, got width {s}")
    return n


def _rescale_fwd(x, inst, fresh):
    a, b = _proj_types(inst)
    return Plus(
        LComp(LFst(a, b), _lop("lrescale", Snd(x))),
        LComp(LSnd(a, b), _lop("lscale", Fst(x), inst.cod)),
    )


def _rescale_rev(x, inst, fresh):
    return LPair(_lop("ldot", Snd(x)), _lop("lscale", Fst(x), inst.cod))


def _matvec_codomain(widths, params):
    size, m = widths
    if size % m:
        raise ShapeError(f"matvec: {size} matrix entries do not split into rows of {m}")
    return size // m


def _matvec_semantics(args, params):
    a, v = args
    return a.reshape(a.size // v.size, v.size) @ v


def _matvec_fwd(x, inst, fresh):
    a, b = _proj_types(inst)
    n = inst.cod
    return Plus(
        LComp(LFst(a, b), _lop("lmatvec_right", Snd(x), n)),
        LComp(LSnd(a, b), _lop("lmatvec", Fst(x), n)),
    )


def _matvec_rev(x, inst, fresh):
    n = inst.cod
    return LPair(_lop("louter", Snd(x), n), _lop("lmatvec_t", Fst(x), n))


def _sum_codomain(widths, params):
    return 1


def _sum_fwd(x, inst, fresh):
    return _lop("lsum", None, inst.widths[0])


def _sum_rev(x, inst, fresh):
    return _lop("lbroadcast", None, inst.widths[0])


def _sigmoid(a: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-a))


def _sigmoid_deriv(x, inst, fresh):
    s = fresh("s")
    ones = const(np.ones(inst.cod))
    slope = Op("mul", Pair(Var(s), Op("sub", Pair(ones, Var(s)))))
    return Let(s, Op("sigmoid", x), _lop("lmul", slope))


def _scaling(factor: Callable[[Term], Term]) -> DerivBuilder:
    """Derivative builder of an elementwise map with the given slope."""

    def build(x, inst, fresh):
        return _lop("lmul", factor(x))

    return build


def _neg_deriv(x, inst, fresh):
    return _lop("lneg", None, inst.cod)


def _swap_codomain(widths, params):
    if widths[0] != 2:
        raise ShapeError(f"swap acts on (real 2), got width {widths[0]}")
    return 2


def _flip(x, inst, fresh):
    return _lop("lflip")


def _mul2_codomain(widths, params):
    if widths[0] != 2:
        raise ShapeError(f"mul2 acts on (real 2), got width {widths[0]}")
    return 1


def _mul2_fwd(x, inst, fresh):
    return _lop("ldot", Op("swap", x))


def _mul2_rev(x, inst, fresh):
    return _lop("lrescale", Op("swap", x))


def _map_codomain(widths, params):
    return widths[0]


def _map_semantics(fn: Callable[[np.ndarray], np.ndarray], v: np.ndarray) -> np.ndarray:
    """`fn` maps a width-1 array to a width-1 array."""
    return np.concatenate([np.zeros(0)] + [fn(v[i : i + 1]) for i in range(v.size)])


def _map_primal(x, inst, fresh):
    u = fresh("u")
    return Op("map", Pair(Lam(u, REAL1, Fst(App(Fst(x), Var(u)))), Snd(x)))


def _map_fwd(x, inst, fresh):
    n = inst.cod
    tangent_fn = Fun(REAL1, REAL1)
    return Plus(
        LComp(LFst(tangent_fn, Real(n)), _lop("lmapapply", Snd(x))),
        LComp(LSnd(tangent_fn, Real(n)), _lop("lzipwith", x)),
    )


def _map_rev(x, inst, fresh):
    return LPair(_lop("lzip", Snd(x)), _lop("lzipwith", x))


def map_derivatives() -> tuple[tuple[DerivBuilder, DerivBuilder], tuple[DerivBuilder, DerivBuilder]]:
    """(primal, forward) and (primal, reverse) builders of `map`.

    Both take `x : (prod (fun (real 1) (prod (real 1) (linfun (real 1) (real 1)))) (real n))`.
    """
    return (_map_primal, _map_fwd), (_map_primal, _map_rev)


SMOOTH_OPS: tuple[OpSpec, ...] = (
    OpSpec(
        "const", 0, _const_codomain, lambda args, params: np.array(params, dtype=np.float64),
        _const_fwd, _const_rev, primal=_const_primal, description="constant array",
    ),
    OpSpec(
        "add", 2, _same_widths, lambda args, params: args[0] + args[1],
        _add_fwd, _add_rev, example_widths=(3, 3), description="elementwise addition",
    ),
    OpSpec(
        "sub", 2, _same_widths, lambda args, params: args[0] - args[1],
        _sub_fwd, _sub_rev, example_widths=(3, 3), description="elementwise subtraction",
    ),
    OpSpec(
        "mul", 2, _same_widths, lambda args, params: args[0] * args[1],
        _mul_fwd, _mul_rev, example_widths=(3, 3), description="elementwise product",
    ),
    OpSpec(
        "inner", 2, _inner_codomain, lambda args, params: np.array([np.dot(args[0], args[1])]),
        _inner_fwd, _inner_rev, example_widths=(3, 3), description="inner product",
    ),
    OpSpec(
        "rescale", 2, _rescale_codomain, lambda args, params: args[0][0] * args[1],
        _rescale_fwd, _rescale_rev, example_widths=(1, 3), description="scalar times vector",
    ),
    OpSpec(
        "matvec", 2, _matvec_codomain, _matvec_semantics,
        _matvec_fwd, _matvec_rev, example_widths=(6, 3),
        description="row-major matrix times vector",
    ),
    OpSpec(
        "sum", 1, _sum_codomain, lambda args, params: np.array([np.sum(args[0])]),
        _sum_fwd, _sum_rev, example_widths=(4,), description="sum of all elements",
    ),
    OpSpec(
        "sigmoid", 1, _elementwise, lambda args, params: _sigmoid(args[0]),
        _sigmoid_deriv, _sigmoid_deriv, example_widths=(3,), description="logistic sigmoid",
    ),
    OpSpec(
        "sin", 1, _elementwise, lambda args, params: np.sin(args[0]),
        _scaling(lambda x: Op("cos", x)), _scaling(lambda x: Op("cos", x)),
        example_widths=(3,),
    ),
    OpSpec(
        "cos", 1, _elementwise, lambda args, params: np.cos(args[0]),
        _scaling(lambda x: Op("neg", Op("sin", x))), _scaling(lambda x: Op("neg", Op("sin", x))),
        example_widths=(3,),
    ),
    OpSpec(
        "exp", 1, _elementwise, lambda args, params: np.exp(args[0]),
        _scaling(lambda x: Op("exp", x)), _scaling(lambda x: Op("exp", x)),
        example_widths=(3,),
    ),
    OpSpec(
        "square", 1, _elementwise, lambda args, params: args[0] * args[0],
        _scaling(lambda x: Op("add", Pair(x, x))), _scaling(lambda x: Op("add", Pair(x, x))),
        example_widths=(3,),
    ),
    OpSpec(
        "neg", 1, _elementwise, lambda args, params: -args[0],
        _neg_deriv, _neg_deriv, example_widths=(3,),
    ),
    OpSpec(
        "swap", 1, _swap_codomain, lambda args, params: args[0][::-1].copy(),
        _flip, _flip, example_widths=(2,), description="exchange the two entries",
    ),
    OpSpec(
        "mul2", 1, _mul2_codomain, lambda args, params: np.array([args[0][0] * args[0][1]]),
        _mul2_fwd, _mul2_rev, example_widths=(2,), description="product of the two entries",
    ),
    OpSpec(
        "map", 2, _map_codomain, _map_semantics, _map_fwd, _map_rev,
        higher_order=True, primal=_map_primal,
        description="apply a scalar function to every element",
    ),
)


@cache
def builtin_registry() -> Registry:
    return Registry(
        {spec.name: spec for spec in SMOOTH_OPS},
        {spec.name: spec for spec in LINEAR_OPS},
    )
