"""Types of the source language and of the applied target language.

Source types are real arrays, the unit type, binary products and functions.
The target language adds `LinFun` (linear functions) and `MapT` (formal sums
of key/value pairs). Every type prints in the s-expression surface syntax.
"""

from __future__ import annotations

from dataclasses import dataclass

from lamdiff.errors import NonFirstOrderType


@dataclass(frozen=True)
class Real:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"real arrays have width >= 1, got {self.n}")

    def __str__(self) -> str:
        return f"(real {self.n})"


@dataclass(frozen=True)
class Unit:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class Prod:
    left: Type
    right: Type

    def __str__(self) -> str:
        return f"(prod {self.left} {self.right})"


@dataclass(frozen=True)
class Fun:
    dom: Type
    cod: Type

    def __str__(self) -> str:
        return f"(fun {self.dom} {self.cod})"


@dataclass(frozen=True)
class LinFun:
    dom: Type
    cod: Type

    def __str__(self) -> str:
        return f"(linfun {self.dom} {self.cod})"


@dataclass(frozen=True)
class MapT:
    key: Type
    val: Type

    def __str__(self) -> str:
        return f"(map {self.key} {self.val})"


Type = Real | Unit | Prod | Fun | LinFun | MapT

UNIT = Unit()
REAL1 = Real(1)


def is_first_order(ty: Type) -> bool:
    """True when `ty` is built from real arrays, unit and products only."""
    match ty:
        case Real() | Unit():
            return True
        case Prod(left, right):
            return is_first_order(left) and is_first_order(right)
    return False


def is_source_type(ty: Type) -> bool:
    match ty:
        case Real() | Unit():
            return True
        case Prod(a, b) | Fun(a, b):
            return is_source_type(a) and is_source_type(b)
    return False


def width(ty: Type) -> int:
    """Number of scalars in a value of first-order type `ty`."""
    match ty:
        case Real(n):
            return n
        case Unit():
            return 0
        case Prod(left, right):
            return width(left) + width(right)
    raise NonFirstOrderType(f"{ty} is not a first-order type")


# ---------------------------------------------------------------------------
# AD type translations
# ---------------------------------------------------------------------------

def type_translate_fwd(ty: Type) -> tuple[Type, Type]:
    """(primal, tangent) types of forward-mode AD."""
    match ty:
        case Real() | Unit():
            return ty, ty
        case Prod(left, right):
            l1, l2 = type_translate_fwd(left)
            r1, r2 = type_translate_fwd(right)
            return Prod(l1, r1), Prod(l2, r2)
        case Fun(dom, cod):
            d1, d2 = type_translate_fwd(dom)
            c1, c2 = type_translate_fwd(cod)
            return Fun(d1, Prod(c1, LinFun(d2, c2))), Fun(d1, c2)
    raise NonFirstOrderType(f"{ty} is not a source type")


def type_translate_rev(ty: Type) -> tuple[Type, Type]:
    """(primal, adjoint) types of reverse-mode AD."""
    match ty:
        case Real() | Unit():
            return ty, ty
        case Prod(left, right):
            l1, l2 = type_translate_rev(left)
            r1, r2 = type_translate_rev(right)
            return Prod(l1, r1), Prod(l2, r2)
        case Fun(dom, cod):
            d1, d2 = type_translate_rev(dom)
            c1, c2 = type_translate_rev(cod)
            return Fun(d1, Prod(c1, LinFun(c2, d2))), MapT(d1, c2)
    raise NonFirstOrderType(f"{ty} is not a source type")
