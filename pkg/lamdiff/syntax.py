"""Abstract syntax of source and target terms.

Source terms form a simply typed lambda calculus over real arrays. Target
terms extend them with the linear-function and tensor constructs used by the
emitted derivative code. Every node carries an optional source location that
takes no part in equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterator

from lamdiff.errors import Location
from lamdiff.types import Type


def _loc():
    return field(default=None, kw_only=True, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Source terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Op:
    name: str
    arg: Term
    params: tuple[float, ...] = ()
    loc: Location | None = _loc()


@dataclass(frozen=True)
class UnitVal:
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Pair:
    left: Term
    right: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Fst:
    arg: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Snd:
    arg: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Lam:
    binder: str
    binder_type: Type
    body: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Let:
    """`let binder = bound in body`, typed and evaluated as `(λbinder. body) bound`."""

    binder: str
    bound: Term
    body: Term
    loc: Location | None = _loc()


# ---------------------------------------------------------------------------
# Target-only terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    ty: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class Plus:
    left: Term
    right: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LOp:
    """A registered linear operation, parameterised by a primal argument."""

    name: str
    arg: Term
    dims: tuple[int, ...] = ()
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LId:
    ty: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LComp:
    """Diagrammatic composition: apply `first`, then `second`."""

    first: Term
    second: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LApp:
    fn: Term
    arg: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LSwap:
    body: Term
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LEval:
    arg: Term
    result_type: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LSing:
    arg: Term
    value_type: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LCurryInv:
    body: Term
    result_type: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LFst:
    left_type: Type
    right_type: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LSnd:
    left_type: Type
    right_type: Type
    loc: Location | None = _loc()


@dataclass(frozen=True)
class LPair:
    left: Term
    right: Term
    loc: Location | None = _loc()


SourceTerm = Var | Op | UnitVal | Pair | Fst | Snd | Lam | App | Let
Term = (
    SourceTerm | Zero | Plus | LOp | LId | LComp | LApp | LSwap | LEval
    | LSing | LCurryInv | LFst | LSnd | LPair
)

SOURCE_NODES = (Var, Op, UnitVal, Pair, Fst, Snd, Lam, App, Let)
TERM_NODES = SOURCE_NODES + (
    Zero, Plus, LOp, LId, LComp, LApp, LSwap, LEval, LSing, LCurryInv, LFst, LSnd, LPair,
)


def is_term(obj: object) -> bool:
    return isinstance(obj, TERM_NODES)


def subterms(term: Term) -> Iterator[Term]:
    """Immediate subterms, in field order."""
    for f in fields(term):
        value = getattr(term, f.name)
        if is_term(value):
            yield value


def map_subterms(term: Term, fn: Callable[[Term], Term]) -> Term:
    """Rebuild `term` with `fn` applied to each immediate subterm."""
    changes = {}
    for f in fields(term):
        value = getattr(term, f.name)
        if is_term(value):
            new = fn(value)
            if new is not value:
                changes[f.name] = new
    return replace(term, **changes) if changes else term


def term_size(term: Term) -> int:
    return 1 + sum(term_size(t) for t in subterms(term))


def const(values) -> Op:
    """The constant-array term `(const c1 ... cn)`."""
    return Op("const", UnitVal(), tuple(float(v) for v in values))


def is_const(term: Term) -> bool:
    return isinstance(term, Op) and term.name == "const"


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Program:
    """A body over the single free variable `arg` of type `arg_type`."""

    arg_type: Type
    body: Term
    arg: str = "arg"

    def as_term(self) -> Lam:
        return Lam(self.arg, self.arg_type, self.body)

    @classmethod
    def from_term(cls, term: Term, arg_type: Type) -> Program:
        """Wrap a closed function term, eta-expanding when it is not a lambda."""
        from lamdiff.names import substitute

        if isinstance(term, Lam):
            body = term.body
            if term.binder != "arg":
                body = substitute(body, term.binder, Var("arg"))
            return cls(term.binder_type, body)
        return cls(arg_type, App(term, Var("arg")))
