"""Names and binders: fresh-name supply, free variables, substitution,
alpha-equivalence and a small beta-normaliser."""

from __future__ import annotations

import re
from dataclasses import fields

from lamdiff.syntax import (
    App,
    Fst,
    Lam,
    Let,
    Pair,
    Snd,
    Term,
    Var,
    is_term,
    map_subterms,
    subterms,
)

_SUFFIX = re.compile(r"_\d+$")


def base_name(name: str) -> str:
    return _SUFFIX.sub("", name) or name


class Fresh:
    """Deterministic supply of names of the form `base_k`."""

    def __init__(self, start: int = 0):
        self._counter = start

    def __call__(self, base: str = "x") -> str:
        self._counter += 1
        return f"{base_name(base)}_{self._counter}"


def free_vars(term: Term) -> frozenset[str]:
    match term:
        case Var(name):
            return frozenset({name})
        case Lam(binder, _, body):
            return free_vars(body) - {binder}
        case Let(binder, bound, body):
            return free_vars(bound) | (free_vars(body) - {binder})
    result: frozenset[str] = frozenset()
    for sub in subterms(term):
        result |= free_vars(sub)
    return result


def _avoiding(base: str, taken: set[str]) -> str:
    k = 1
    while f"{base_name(base)}_{k}" in taken:
        k += 1
    return f"{base_name(base)}_{k}"


def substitute(term: Term, name: str, replacement: Term) -> Term:
    """Capture-avoiding substitution of `replacement` for free `name`."""
    return _subst(term, name, replacement, free_vars(replacement))


def _subst(term: Term, name: str, repl: Term, repl_fv: frozenset[str]) -> Term:
    match term:
        case Var(v):
            return repl if v == name else term
        case Lam(binder, ty, body):
            if binder == name:
                return term
            binder, body = _freshen(binder, body, name, repl_fv)
            return Lam(binder, ty, _subst(body, name, repl, repl_fv), loc=term.loc)
        case Let(binder, bound, body):
            bound = _subst(bound, name, repl, repl_fv)
            if binder == name:
                return Let(binder, bound, body, loc=term.loc)
            binder, body = _freshen(binder, body, name, repl_fv)
            return Let(binder, bound, _subst(body, name, repl, repl_fv), loc=term.loc)
    return map_subterms(term, lambda t: _subst(t, name, repl, repl_fv))


def _freshen(binder: str, body: Term, name: str, repl_fv: frozenset[str]) -> tuple[str, Term]:
    if binder not in repl_fv or name not in free_vars(body):
        return binder, body
    renamed = _avoiding(binder, set(repl_fv) | free_vars(body) | {name})
    return renamed, substitute(body, binder, Var(renamed))


def alpha_equivalent(a: Term, b: Term) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Term, b: Term, env_a: dict, env_b: dict, depth: int) -> bool:
    if type(a) is not type(b):
        return False
    match a:
        case Var(name):
            ia, ib = env_a.get(name), env_b.get(b.name)
            if ia is None and ib is None:
                return name == b.name
            return ia == ib
        case Lam(binder, ty, body):
            return ty == b.binder_type and _alpha(
                body, b.body, {**env_a, binder: depth}, {**env_b, b.binder: depth}, depth + 1
            )
        case Let(binder, bound, body):
            return _alpha(bound, b.bound, env_a, env_b, depth) and _alpha(
                body, b.body, {**env_a, binder: depth}, {**env_b, b.binder: depth}, depth + 1
            )
    for f in fields(a):
        if not f.compare:
            continue
        x, y = getattr(a, f.name), getattr(b, f.name)
        if is_term(x):
            if not _alpha(x, y, env_a, env_b, depth):
                return False
        elif x != y:
            return False
    return True


def normalize(term: Term) -> Term:
    """Inline lets, contract beta-redexes and projections of pairs.

    No eta-contraction and no reduction of the linear combinators.
    """
    match term:
        case Let(binder, bound, body):
            return normalize(substitute(body, binder, normalize(bound)))
        case App(fn, arg):
            fn, arg = normalize(fn), normalize(arg)
            if isinstance(fn, Lam):
                return normalize(substitute(fn.body, fn.binder, arg))
            return App(fn, arg, loc=term.loc)
        case Fst(arg):
            arg = normalize(arg)
            return arg.left if isinstance(arg, Pair) else Fst(arg, loc=term.loc)
        case Snd(arg):
            arg = normalize(arg)
            return arg.right if isinstance(arg, Pair) else Snd(arg, loc=term.loc)
    return map_subterms(term, normalize)
