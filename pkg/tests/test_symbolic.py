import numpy as np
import pytest

from helpers import compiled, sample

import lamdiff.symbolic
from lamdiff.checking import CompiledProgram
from lamdiff.errors import NoRuleApplies
from lamdiff.evaluator import Evaluator
from lamdiff.fuzz import random_program
from lamdiff.sexpr import parse_term
from lamdiff.symbolic import SymbolicEvaluator, as_array, eval_symbolic
from lamdiff.syntax import App, Fst, LApp, LCurryInv, LId, LOp, LSing, LSwap, Lam, Let, Op, Pair, Plus, Var, Zero, const
from lamdiff.typecheck import typecheck_target
from lamdiff.types import REAL1, MapT
from lamdiff.values import flatten, to_value, value_to_term


def entry(k: float, v: float):
    return LApp(LSing(const([k]), REAL1), const([v]))


def _flat(nf) -> np.ndarray:
    if isinstance(nf, Pair):
        return np.concatenate([_flat(nf.left), _flat(nf.right)])
    if isinstance(nf, Op):
        return as_array(nf)
    return np.zeros(0)


class TestRules:
    def test_beta(self):
        term = App(parse_term("(lam (x (real 1)) (op add (pair x x)))"), const([2.0]))
        assert eval_symbolic(term) == const([4.0])

    def test_curry_inverse_of_zero(self):
        term = LApp(LCurryInv(Lam("k", REAL1, LId(REAL1)), REAL1), Zero(MapT(REAL1, REAL1)))
        assert eval_symbolic(term) == const([0.0])

    def test_linear_constructors_are_values(self):
        term = LOp("lmul", Op("sin", const([1.0])))
        assert eval_symbolic(term) is term

    def test_maps_are_left_nested_chains(self):
        evaluator = SymbolicEvaluator()
        chain = evaluator.plus(evaluator.plus(entry(1.0, 2.0), entry(3.0, 4.0)), Zero(MapT(REAL1, REAL1)))
        assert chain == Plus(entry(1.0, 2.0), entry(3.0, 4.0))
        longer = evaluator.plus(entry(0.0, 0.0), chain)
        assert longer == Plus(Plus(entry(0.0, 0.0), entry(1.0, 2.0)), entry(3.0, 4.0))

    def test_lzip_builds_map_normal_form(self):
        term = LApp(LOp("lzip", const([1.0, 2.0])), const([3.0, 4.0]))
        assert eval_symbolic(term) == Plus(entry(1.0, 3.0), entry(2.0, 4.0))

    def test_swap_family_is_typed_once(self, monkeypatch):
        calls = []

        def counting(ctx, term, registry=None):
            calls.append(term)
            return typecheck_target(ctx, term, registry)

        monkeypatch.setattr(lamdiff.symbolic, "typecheck_target", counting)
        swap = LSwap(Lam("k", REAL1, LOp("lmul", Op("sin", Var("k")))))
        evaluator = SymbolicEvaluator()
        for v in (1.0, 2.0, 3.0):
            nf = evaluator.eval(App(LApp(swap, const([v])), const([0.5])))
            assert as_array(nf)[0] == pytest.approx(np.sin(0.5) * v, rel=1e-14)
        assert len(calls) == 1

    def test_stuck_terms(self):
        with pytest.raises(NoRuleApplies):
            eval_symbolic(Fst(const([1.0])))
        with pytest.raises(NoRuleApplies):
            eval_symbolic(Var("free"))


class TestAdequacy:
    def test_product_reverse(self):
        c = compiled("(prod (real 1) (real 1))", "(op mul (pair (fst arg) (snd arg)))")
        point = value_to_term(c.source_type, [2.0, 3.0])
        nf = eval_symbolic(LApp(Let("arg", point, c.reverse.deriv), const([1.0])))
        assert nf == Pair(const([3.0]), const([2.0]))

    @pytest.mark.parametrize("seed", range(30))
    def test_agrees_with_definitional_evaluator(self, seed):
        c = CompiledProgram.build(random_program(seed, max_depth=4))
        rng = np.random.default_rng([seed, 3])
        evaluator = Evaluator()
        for _ in range(3):
            x = sample(rng, c.in_width)
            point = value_to_term(c.source_type, x)
            value = eval_symbolic(App(c.program.as_term(), point))
            np.testing.assert_array_equal(_flat(value), c.value(x))

            v, w = sample(rng, c.in_width), sample(rng, c.out_width)
            for out, direction, ty in ((c.forward, v, c.source_type), (c.reverse, w, c.result_type)):
                nf = eval_symbolic(LApp(Let(out.arg, point, out.deriv), value_to_term(ty, direction)))
                lin = c.derivative(out, x)
                expected = flatten(evaluator.apply(lin, to_value(ty, direction)))
                np.testing.assert_array_equal(_flat(nf), expected)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(300))
    def test_agrees_on_a_larger_corpus(self, seed):
        self.test_agrees_with_definitional_evaluator(seed)
