"""S-expression surface syntax: reader, parser and pretty-printer.

A program file holds one or more forms

    (program (arg-type T) (body E))

where `arg` is the free variable of `E`. `;` starts a comment that runs to the
end of the line. Binders are renamed to `base_k` with a counter that restarts
for every parse, so printing and parsing again reproduces the same terms.
"""

from __future__ import annotations

from dataclasses import dataclass

from lamdiff.combinators import Combinator, Comp, Curry, Ev, FstC, Id, OpC, PairC, SndC, Terminal
from lamdiff.errors import ParseError
from lamdiff.names import Fresh, substitute
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
    Program,
    Snd,
    Term,
    UnitVal,
    Var,
    Zero,
)
from lamdiff.types import UNIT, Fun, LinFun, MapT, Prod, Real, Type

LINE_WIDTH = 80


# ---------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple[Atom | SList, ...]
    line: int
    col: int


Node = Atom | SList


def read(text: str) -> list[Node]:
    """All top-level s-expressions in `text`."""
    stack: list[tuple[list[Node], int, int]] = []
    top: list[Node] = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            stack.append(([], line, col))
            col, i = col + 1, i + 1
            continue
        if ch == ")":
            if not stack:
                raise ParseError("unexpected ')'", line, col)
            items, l0, c0 = stack.pop()
            node = SList(tuple(items), l0, c0)
            (stack[-1][0] if stack else top).append(node)
            col, i = col + 1, i + 1
            continue
        start, start_col = i, col
        while i < len(text) and not text[i].isspace() and text[i] not in "();":
            i, col = i + 1, col + 1
        (stack[-1][0] if stack else top).append(Atom(text[start:i], line, start_col))
    if stack:
        _, l0, c0 = stack[-1]
        raise ParseError("unclosed '('", l0, c0)
    return top


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _error(node: Node, message: str) -> ParseError:
    return ParseError(message, node.line, node.col)


def _form(node: Node, what: str) -> tuple[str, tuple[Node, ...]]:
    if not isinstance(node, SList) or not node.items or not isinstance(node.items[0], Atom):
        raise _error(node, f"expected {what}")
    return node.items[0].text, node.items[1:]


def _arity(node: Node, args: tuple[Node, ...], n: int, head: str) -> None:
    if len(args) != n:
        raise _error(node, f"'{head}' takes {n} argument(s), got {len(args)}")


def _atom(node: Node, what: str) -> str:
    if not isinstance(node, Atom):
        raise _error(node, f"expected {what}")
    return node.text


def _int(node: Node) -> int:
    text = _atom(node, "an integer")
    try:
        return int(text)
    except ValueError:
        raise _error(node, f"'{text}' is not an integer") from None


def _float(node: Node) -> float:
    text = _atom(node, "a number")
    try:
        return float(text)
    except ValueError:
        raise _error(node, f"'{text}' is not a number") from None


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


_TYPE_FORMS = {"prod": Prod, "fun": Fun, "linfun": LinFun, "map": MapT}


def parse_type_node(node: Node) -> Type:
    if isinstance(node, Atom):
        if node.text == "unit":
            return UNIT
        raise _error(node, f"unknown type '{node.text}'")
    head, args = _form(node, "a type")
    if head == "real":
        _arity(node, args, 1, head)
        n = _int(args[0])
        if n < 1:
            raise _error(args[0], f"real arrays have width >= 1, got {n}")
        return Real(n)
    if head in _TYPE_FORMS:
        _arity(node, args, 2, head)
        return _TYPE_FORMS[head](parse_type_node(args[0]), parse_type_node(args[1]))
    raise _error(node, f"unknown type constructor '{head}'")


class _TermParser:
    def __init__(self, fresh: Fresh):
        self.fresh = fresh

    def term(self, node: Node, scope: dict[str, str]) -> Term:
        loc = (node.line, node.col)
        if isinstance(node, Atom):
            if node.text == "unit":
                return UnitVal(loc=loc)
            if _is_number(node.text):
                raise _error(node, "bare number; write (const ...)")
            return Var(scope.get(node.text, node.text), loc=loc)

        head, args = _form(node, "a term")
        def sub(k: int) -> Term:
            return self.term(args[k], scope)

        def ty(k: int) -> Type:
            return parse_type_node(args[k])

        match head:
            case "lam":
                _arity(node, args, 2, head)
                name, binder_type = self._binder(args[0])
                new = self.fresh(name)
                body = self.term(args[1], {**scope, name: new})
                return Lam(new, parse_type_node(binder_type), body, loc=loc)
            case "let":
                _arity(node, args, 2, head)
                name, bound = self._binder(args[0])
                new = self.fresh(name)
                bound_term = self.term(bound, scope)
                return Let(new, bound_term, self.term(args[1], {**scope, name: new}), loc=loc)
            case "app":
                _arity(node, args, 2, head)
                return App(sub(0), sub(1), loc=loc)
            case "pair":
                _arity(node, args, 2, head)
                return Pair(sub(0), sub(1), loc=loc)
            case "fst":
                _arity(node, args, 1, head)
                return Fst(sub(0), loc=loc)
            case "snd":
                _arity(node, args, 1, head)
                return Snd(sub(0), loc=loc)
            case "op":
                _arity(node, args, 2, head)
                return Op(_atom(args[0], "an operation name"), sub(1), loc=loc)
            case "const":
                if not args:
                    raise _error(node, "'const' needs at least one value")
                return Op("const", UnitVal(loc=loc), tuple(_float(a) for a in args), loc=loc)
            case "zero":
                _arity(node, args, 1, head)
                return Zero(ty(0), loc=loc)
            case "plus":
                _arity(node, args, 2, head)
                return Plus(sub(0), sub(1), loc=loc)
            case "lop":
                _arity(node, args, 3, head)
                if not isinstance(args[1], SList):
                    raise _error(args[1], "expected a list of static widths")
                dims = tuple(_int(d) for d in args[1].items)
                return LOp(_atom(args[0], "a linear operation name"), sub(2), dims, loc=loc)
            case "lid":
                _arity(node, args, 1, head)
                return LId(ty(0), loc=loc)
            case "lcomp":
                _arity(node, args, 2, head)
                return LComp(sub(0), sub(1), loc=loc)
            case "lapp":
                _arity(node, args, 2, head)
                return LApp(sub(0), sub(1), loc=loc)
            case "lswap":
                _arity(node, args, 1, head)
                return LSwap(sub(0), loc=loc)
            case "leval":
                _arity(node, args, 2, head)
                return LEval(sub(0), ty(1), loc=loc)
            case "lsing":
                _arity(node, args, 2, head)
                return LSing(sub(0), ty(1), loc=loc)
            case "lcurryinv":
                _arity(node, args, 2, head)
                return LCurryInv(sub(0), ty(1), loc=loc)
            case "lfst":
                _arity(node, args, 2, head)
                return LFst(ty(0), ty(1), loc=loc)
            case "lsnd":
                _arity(node, args, 2, head)
                return LSnd(ty(0), ty(1), loc=loc)
            case "lpair":
                _arity(node, args, 2, head)
                return LPair(sub(0), sub(1), loc=loc)
        raise _error(node, f"unknown form '{head}'")

    @staticmethod
    def _binder(node: Node) -> tuple[str, Node]:
        if not isinstance(node, SList) or len(node.items) != 2:
            raise _error(node, "expected a binder (name value)")
        return _atom(node.items[0], "a variable name"), node.items[1]


def parse_type(text: str) -> Type:
    nodes = read(text)
    if len(nodes) != 1:
        raise ParseError(f"expected one type, found {len(nodes)} forms", 1, 1)
    return parse_type_node(nodes[0])


def parse_term(text: str, free: tuple[str, ...] = ("arg",)) -> Term:
    nodes = read(text)
    if len(nodes) != 1:
        raise ParseError(f"expected one term, found {len(nodes)} forms", 1, 1)
    return _TermParser(Fresh()).term(nodes[0], {name: name for name in free})


def parse_programs(text: str) -> list[Program]:
    fresh = Fresh()
    programs = []
    for node in read(text):
        head, args = _form(node, "(program ...)")
        if head != "program":
            raise _error(node, f"expected (program ...), found '{head}'")
        fields = {}
        for arg in args:
            key, rest = _form(arg, "(arg-type T) or (body E)")
            if key not in ("arg-type", "body") or len(rest) != 1:
                raise _error(arg, f"unexpected program field '{key}'")
            fields[key] = rest[0]
        if set(fields) != {"arg-type", "body"}:
            raise _error(node, "a program needs both (arg-type T) and (body E)")
        arg_type = parse_type_node(fields["arg-type"])
        body = _TermParser(fresh).term(fields["body"], {"arg": "arg"})
        programs.append(Program(arg_type, body))
    if not programs:
        raise ParseError("no (program ...) form found", 1, 1)
    return programs


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

Tree = str | list


def format_float(x: float) -> str:
    return repr(float(x))


def term_tree(term: Term) -> Tree:
    match term:
        case Var(name):
            return name
        case UnitVal():
            return "unit"
        case Op("const", _, params):
            return ["const", *(format_float(p) for p in params)]
        case Op(name, arg):
            return ["op", name, term_tree(arg)]
        case Pair(left, right):
            return ["pair", term_tree(left), term_tree(right)]
        case Fst(arg):
            return ["fst", term_tree(arg)]
        case Snd(arg):
            return ["snd", term_tree(arg)]
        case Lam(binder, ty, body):
            return ["lam", [binder, str(ty)], term_tree(body)]
        case App(fn, arg):
            return ["app", term_tree(fn), term_tree(arg)]
        case Let(binder, bound, body):
            return ["let", [binder, term_tree(bound)], term_tree(body)]
        case Zero(ty):
            return ["zero", str(ty)]
        case Plus(left, right):
            return ["plus", term_tree(left), term_tree(right)]
        case LOp(name, arg, dims):
            return ["lop", name, [str(d) for d in dims], term_tree(arg)]
        case LId(ty):
            return ["lid", str(ty)]
        case LComp(first, second):
            return ["lcomp", term_tree(first), term_tree(second)]
        case LApp(fn, arg):
            return ["lapp", term_tree(fn), term_tree(arg)]
        case LSwap(body):
            return ["lswap", term_tree(body)]
        case LEval(arg, ty):
            return ["leval", term_tree(arg), str(ty)]
        case LSing(arg, ty):
            return ["lsing", term_tree(arg), str(ty)]
        case LCurryInv(body, ty):
            return ["lcurryinv", term_tree(body), str(ty)]
        case LFst(left, right):
            return ["lfst", str(left), str(right)]
        case LSnd(left, right):
            return ["lsnd", str(left), str(right)]
        case LPair(left, right):
            return ["lpair", term_tree(left), term_tree(right)]
    raise TypeError(f"not a term: {term!r}")


def combinator_tree(c: Combinator) -> Tree:
    match c:
        case Id(ty):
            return ["id", str(ty)]
        case Comp(first, second):
            return ["comp", combinator_tree(first), combinator_tree(second)]
        case Terminal(ty):
            return ["terminal", str(ty)]
        case PairC(left, right):
            return ["pairc", combinator_tree(left), combinator_tree(right)]
        case FstC(left, right):
            return ["fstc", str(left), str(right)]
        case SndC(left, right):
            return ["sndc", str(left), str(right)]
        case Ev(arg, res):
            return ["ev", str(arg), str(res)]
        case Curry(body, ctx, arg, _):
            return ["curry", str(ctx), str(arg), combinator_tree(body)]
        case OpC(name, _, _, params):
            return ["opc", name, *(format_float(p) for p in params)]
    raise TypeError(f"not a combinator: {c!r}")


# leading items kept on the opening line when a form is broken
_HEADER_ITEMS = {"lam": 2, "let": 2, "op": 2, "lop": 3, "curry": 3}


def _flat(tree: Tree) -> str:
    if isinstance(tree, str):
        return tree
    return "(" + " ".join(_flat(t) for t in tree) + ")"


def layout(tree: Tree, indent: int = 0) -> str:
    flat = _flat(tree)
    if isinstance(tree, str) or not tree or indent + len(flat) <= LINE_WIDTH:
        return flat
    keep = _HEADER_ITEMS.get(tree[0], 1) if isinstance(tree[0], str) else 1
    head = "(" + " ".join(_flat(t) for t in tree[:keep])
    pad = " " * (indent + 2)
    rest = "".join("\n" + pad + layout(t, indent + 2) for t in tree[keep:])
    return head + rest + ")"


def print_term(term: Term, indent: int = 0) -> str:
    return layout(term_tree(term), indent)


def print_type(ty: Type) -> str:
    return str(ty)


def print_combinator(c: Combinator) -> str:
    return layout(combinator_tree(c))


def print_program(program: Program, comment: str | None = None) -> str:
    body = program.body
    if program.arg != "arg":
        body = substitute(body, program.arg, Var("arg"))
    lines = [f"; {line}" for line in (comment.splitlines() if comment else [])]
    lines.append("(program")
    lines.append(f"  (arg-type {program.arg_type})")
    lines.append("  (body")
    lines.append("    " + print_term(body, 4) + "))")
    return "\n".join(lines) + "\n"
