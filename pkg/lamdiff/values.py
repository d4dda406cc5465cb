"""Runtime values of the applied target language.

`LinFun` values are ordinary callables tagged as linear, and `Map` values are
finite sequences of key/value pairs. Two maps are never compared
structurally; only what `lcurryinv` observes of them is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from lamdiff.errors import NonFirstOrderType, ShapeMismatch
from lamdiff.syntax import Pair, Term, UnitVal, const
from lamdiff.types import Prod, Real, Type, Unit, width


@dataclass(frozen=True, eq=False)
class RealVec:
    data: np.ndarray

    @classmethod
    def of(cls, values) -> RealVec:
        return cls(np.asarray(values, dtype=np.float64).reshape(-1))

    @property
    def width(self) -> int:
        return int(self.data.size)

    def __repr__(self) -> str:
        return f"RealVec({self.data.tolist()})"


@dataclass(frozen=True)
class UnitV:
    pass


@dataclass(frozen=True, eq=False)
class PairV:
    left: Value
    right: Value


@dataclass(frozen=True, eq=False)
class Closure:
    binder: str
    body: Term
    env: dict
    linear: bool = False


@dataclass(frozen=True, eq=False)
class Builtin:
    fn: Callable[[Value], Value]
    linear: bool = False


@dataclass(frozen=True, eq=False)
class MapV:
    entries: tuple[tuple[Value, Value], ...] = ()


Value = RealVec | UnitV | PairV | Closure | Builtin | MapV

UNIT_V = UnitV()


def linear(fn: Callable[[Value], Value]) -> Builtin:
    return Builtin(fn, linear=True)


# ---------------------------------------------------------------------------
# First-order conversions
# ---------------------------------------------------------------------------

def to_value(ty: Type, flat) -> Value:
    """Build a value of first-order `ty` from a flat vector of its scalars."""
    flat = np.asarray(flat, dtype=np.float64).reshape(-1)
    if flat.size != width(ty):
        raise ShapeMismatch(f"{ty} holds {width(ty)} scalars, got {flat.size}")
    value, _ = _build(ty, flat, 0)
    return value


def _build(ty: Type, flat: np.ndarray, pos: int) -> tuple[Value, int]:
    match ty:
        case Real(n):
            return RealVec(flat[pos : pos + n].copy()), pos + n
        case Unit():
            return UNIT_V, pos
        case Prod(left, right):
            lv, pos = _build(left, flat, pos)
            rv, pos = _build(right, flat, pos)
            return PairV(lv, rv), pos
    raise NonFirstOrderType(f"{ty} is not a first-order type")


def flatten(value: Value) -> np.ndarray:
    """Scalars of a first-order value, left to right."""
    match value:
        case RealVec(data):
            return data
        case UnitV():
            return np.zeros(0)
        case PairV(left, right):
            return np.concatenate([flatten(left), flatten(right)])
    raise NonFirstOrderType(f"{type(value).__name__} is not a first-order value")


def value_to_term(ty: Type, flat) -> Term:
    """A closed constant term of first-order `ty`."""
    return _to_term(to_value(ty, flat))


def _to_term(value: Value) -> Term:
    match value:
        case RealVec(data):
            return const(data.tolist())
        case UnitV():
            return UnitVal()
        case PairV(left, right):
            return Pair(_to_term(left), _to_term(right))
    raise NonFirstOrderType(f"{type(value).__name__} is not a first-order value")


def to_ground(value: Value):
    """numpy arrays and tuples, the shape linear-op semantics work on."""
    match value:
        case RealVec(data):
            return data
        case UnitV():
            return ()
        case PairV(left, right):
            return (to_ground(left), to_ground(right))
    raise NonFirstOrderType(f"{type(value).__name__} is not a first-order value")


def from_ground(ground) -> Value:
    if isinstance(ground, np.ndarray):
        return RealVec(ground)
    if ground == ():
        return UNIT_V
    left, right = ground
    return PairV(from_ground(left), from_ground(right))
