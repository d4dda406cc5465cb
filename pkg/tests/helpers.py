"""Shared programs and sampling helpers for the test modules."""

import numpy as np

from lamdiff.checking import CompiledProgram
from lamdiff.sexpr import parse_programs, parse_term
from lamdiff.syntax import Program
from lamdiff.types import Prod, Real

PAIR22 = Prod(Real(2), Real(2))


def program(text: str) -> Program:
    return parse_programs(text)[-1]


def compiled(arg_type: str, body: str) -> CompiledProgram:
    return CompiledProgram.build(program(f"(program (arg-type {arg_type}) (body {body}))"))


# Pairs of beta-eta-equal bodies over `arg : (prod (real 2) (real 2))`.
BETA_ETA_PAIRS = {
    "fst-of-pair": (
        "(fst (pair (op sin (fst arg)) (op cos (snd arg))))",
        "(op sin (fst arg))",
    ),
    "snd-of-pair": (
        "(snd (pair (op sin (fst arg)) (op cos (snd arg))))",
        "(op cos (snd arg))",
    ),
    "pair-eta": (
        "(pair (fst arg) (snd arg))",
        "arg",
    ),
    "unit-eta": (
        "(pair (app (lam (z (real 2)) unit) (op sin (fst arg))) (snd arg))",
        "(pair unit (snd arg))",
    ),
    "function-beta": (
        "(app (lam (x (real 2)) (op mul (pair x x))) (op sin (fst arg)))",
        "(op mul (pair (op sin (fst arg)) (op sin (fst arg))))",
    ),
    "function-eta": (
        "(let (f (lam (y (real 2)) (app (lam (x (real 2)) (op sin x)) y))) (app f (snd arg)))",
        "(let (f (lam (x (real 2)) (op sin x))) (app f (snd arg)))",
    ),
    "let-beta": (
        "(let (x (op add (pair (fst arg) (snd arg)))) (op mul (pair x x)))",
        "(op mul (pair (op add (pair (fst arg) (snd arg))) (op add (pair (fst arg) (snd arg)))))",
    ),
    "higher-order-beta": (
        "(app (lam (g (fun (real 2) (real 2))) (app g (app g (fst arg)))) (lam (x (real 2)) (op sin x)))",
        "(op sin (op sin (fst arg)))",
    ),
    "projection-under-lambda": (
        "(app (lam (p (prod (real 2) (real 2))) (fst p)) (pair (snd arg) (fst arg)))",
        "(snd arg)",
    ),
    "map-eta": (
        "(op map (pair (lam (u (real 1)) (app (lam (w (real 1)) (op sin w)) u)) (fst arg)))",
        "(op map (pair (lam (u (real 1)) (op sin u)) (fst arg)))",
    ),
    "let-pair-eta": (
        "(let (p (pair (op sin (fst arg)) (snd arg))) (pair (fst p) (snd p)))",
        "(pair (op sin (fst arg)) (snd arg))",
    ),
    "shadowed-beta": (
        "(app (lam (x (real 2)) (app (lam (x (real 2)) (op mul (pair x x))) (op add (pair x x)))) (fst arg))",
        "(op mul (pair (op add (pair (fst arg) (fst arg))) (op add (pair (fst arg) (fst arg)))))",
    ),
}


def beta_eta_programs(name: str) -> tuple[Program, Program]:
    lhs, rhs = BETA_ETA_PAIRS[name]
    return Program(PAIR22, parse_term(lhs)), Program(PAIR22, parse_term(rhs))


def sample(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.uniform(-2.0, 2.0, size=size)
