import numpy as np
import pytest

from lamdiff.errors import UnknownOp, WidthMismatch
from lamdiff.evaluator import Evaluator, zero_of
from lamdiff.names import Fresh
from lamdiff.primitives import (
    LinOpSpec,
    OpSpec,
    _map_semantics,
    builtin_registry,
    domain_type,
    map_derivatives,
)
from lamdiff.syntax import LOp, Lam, LId, Op, Pair, Term, UnitVal, Var, const, subterms
from lamdiff.typecheck import typecheck_target
from lamdiff.types import REAL1, UNIT, Fun, LinFun, MapT, Prod, Real
from lamdiff.values import MapV, PairV, RealVec, flatten, to_value

REGISTRY = builtin_registry()
FIRST_ORDER_OPS = sorted(
    name for name, spec in REGISTRY.items() if not spec.higher_order and spec.example_widths
)


def _names(term: Term, kind) -> set[str]:
    found = {term.name} if isinstance(term, kind) else set()
    for sub in subterms(term):
        found |= _names(sub, kind)
    return found


def _instance(name: str):
    spec = REGISTRY[name]
    inst = spec.instance(domain_type(spec.example_widths))
    return spec, inst, inst.dom, Real(inst.cod)


def _derivatives(name: str, x: np.ndarray):
    spec, inst, dom, cod = _instance(name)
    evaluator = Evaluator()
    env = {"x": to_value(dom, x)}
    fwd = evaluator.eval(env, spec.fwd_deriv(Var("x"), inst, Fresh()))
    rev = evaluator.eval(env, spec.rev_deriv(Var("x"), inst, Fresh()))
    return evaluator, fwd, rev


def _width(ty) -> int:
    return int(flatten(zero_of(ty)).size)


class TestRegistry:
    def test_builtin_operations(self):
        for name in ("const", "add", "sub", "mul", "inner", "rescale", "matvec", "sum",
                     "sigmoid", "sin", "cos", "exp", "square", "neg", "swap", "mul2", "map"):
            assert name in REGISTRY

    def test_unknown_names(self):
        with pytest.raises(UnknownOp):
            REGISTRY.lookup("tanh")
        with pytest.raises(UnknownOp):
            REGISTRY.lookup_linear("lsin")

    def test_extended_registry_leaves_builtin_untouched(self):
        cube = OpSpec("cube", 1, lambda w, p: w[0], lambda args, params: args[0] ** 3,
                      lambda x, inst, fresh: LOp("lmul", Op("mul", Pair(const([3.0]), Op("square", x)))),
                      lambda x, inst, fresh: LOp("lmul", Op("mul", Pair(const([3.0]), Op("square", x)))))
        lidentity = LinOpSpec("lidentity", lambda p, dims: (REAL1, REAL1), lambda p, y, d: y)
        extended = REGISTRY.extended(cube, lidentity)
        assert "cube" in extended and "lidentity" in extended.linear
        assert "cube" not in REGISTRY

    @pytest.mark.parametrize("name", sorted(REGISTRY))
    def test_derivatives_only_use_registered_operations(self, name):
        spec = REGISTRY[name]
        if spec.higher_order:
            inst = spec.instance(Prod(Fun(REAL1, REAL1), Real(3)))
        elif spec.arity == 0:
            inst = spec.instance(UNIT, (1.0, 2.0))
        else:
            _, inst, _, _ = _instance(name)
        for term in (spec.fwd_deriv(Var("x"), inst, Fresh()), spec.rev_deriv(Var("x"), inst, Fresh())):
            assert _names(term, Op) <= set(REGISTRY)
            assert _names(term, LOp) <= set(REGISTRY.linear)


class TestDerivativeTyping:
    @pytest.mark.parametrize("name", FIRST_ORDER_OPS)
    def test_forward_and_reverse_types(self, name):
        spec, inst, dom, cod = _instance(name)
        ctx = {"x": dom}
        assert typecheck_target(ctx, spec.fwd_deriv(Var("x"), inst, Fresh())) == LinFun(dom, cod)
        assert typecheck_target(ctx, spec.rev_deriv(Var("x"), inst, Fresh())) == LinFun(cod, dom)

    def test_const(self):
        spec = REGISTRY["const"]
        inst = spec.instance(UNIT, (1.0, 2.0))
        assert typecheck_target({"x": UNIT}, spec.fwd_deriv(Var("x"), inst, Fresh())) == LinFun(UNIT, Real(2))
        lin = Evaluator().eval({}, spec.fwd_deriv(UnitVal(), inst, Fresh()))
        np.testing.assert_array_equal(flatten(lin.fn(zero_of(UNIT))), [0.0, 0.0])


class TestDerivativeValues:
    @pytest.mark.parametrize("name", FIRST_ORDER_OPS)
    def test_linearity(self, name, rng):
        _, _, dom, cod = _instance(name)
        n, m = _width(dom), _width(cod)
        for _ in range(10):
            evaluator, fwd, rev = _derivatives(name, rng.uniform(-2, 2, n))
            for lin, src, size in ((fwd, dom, n), (rev, cod, m)):
                np.testing.assert_array_equal(flatten(evaluator.apply(lin, zero_of(src))), 0.0)
                a, b = rng.uniform(-1, 1, size), rng.uniform(-1, 1, size)
                total = flatten(evaluator.apply(lin, to_value(src, a + b)))
                parts = flatten(evaluator.apply(lin, to_value(src, a))) + flatten(evaluator.apply(lin, to_value(src, b)))
                np.testing.assert_allclose(total, parts, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("name", FIRST_ORDER_OPS)
    def test_reverse_is_transpose_of_forward(self, name, rng):
        _, _, dom, cod = _instance(name)
        n, m = _width(dom), _width(cod)
        for _ in range(20):
            evaluator, fwd, rev = _derivatives(name, rng.uniform(-2, 2, n))
            v, w = rng.uniform(-1, 1, n), rng.uniform(-1, 1, m)
            lhs = np.dot(w, flatten(evaluator.apply(fwd, to_value(dom, v))))
            rhs = np.dot(flatten(evaluator.apply(rev, to_value(cod, w))), v)
            assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))

    @pytest.mark.parametrize("name", FIRST_ORDER_OPS)
    def test_forward_matches_finite_differences(self, name, rng):
        spec, _, dom, _ = _instance(name)
        n, h = _width(dom), 1e-4
        evaluator = Evaluator()

        def f(x):
            return evaluator.run_op(spec, to_value(dom, x), ()).data

        for _ in range(50):
            x, v = rng.uniform(-2, 2, n), rng.uniform(-1, 1, n)
            _, fwd, _ = _derivatives(name, x)
            jvp = flatten(evaluator.apply(fwd, to_value(dom, v)))
            fd = (f(x + h * v) - f(x - h * v)) / (2 * h)
            assert np.max(np.abs(jvp - fd) / (1 + np.abs(fd))) <= 1e-5

    def test_product_rule(self):
        evaluator = Evaluator()
        spec = REGISTRY["mul"]
        dom = Prod(REAL1, REAL1)
        inst = spec.instance(dom)
        lin = evaluator.eval({"x": to_value(dom, [2.0, 3.0])}, spec.fwd_deriv(Var("x"), inst, Fresh()))
        np.testing.assert_array_equal(flatten(evaluator.apply(lin, to_value(dom, [1.0, 0.0]))), [3.0])
        np.testing.assert_array_equal(flatten(evaluator.apply(lin, to_value(dom, [0.0, 1.0]))), [2.0])

    def test_sigmoid_slope_at_zero(self):
        evaluator, fwd, _ = _derivatives("sigmoid", np.zeros(3))
        np.testing.assert_allclose(flatten(evaluator.apply(fwd, RealVec.of(np.ones(3)))), 0.25)


class TestMap:
    def test_empty_input(self):
        assert _map_semantics(np.sin, np.zeros(0)).size == 0
        assert Evaluator()._zip(np.zeros(0), np.zeros(0)).entries == ()

    def test_zip_width_mismatch(self):
        lzip = Evaluator().linear_op("lzip", RealVec.of([1.0, 2.0]), ())
        with pytest.raises(WidthMismatch):
            lzip.fn(RealVec.of([1.0, 2.0, 3.0]))

    def test_identity_function_passes_tangent_through(self):
        evaluator = Evaluator()
        inst = REGISTRY["map"].instance(Prod(Fun(REAL1, REAL1), Real(3)))
        transformed_identity = Lam("u", REAL1, Pair(Var("u"), LId(REAL1)))
        x = evaluator.eval({}, Pair(transformed_identity, const([0.5, -1.0, 2.0])))
        (_, map_fwd), _ = map_derivatives()
        lin = evaluator.eval({"x": x}, map_fwd(Var("x"), inst, Fresh()))
        w = RealVec.of([1.0, 2.0, 3.0])
        out = evaluator.apply(lin, PairV(zero_of(Fun(REAL1, REAL1)), w))
        np.testing.assert_array_equal(out.data, w.data)

    def test_zip_pairs_positions_with_values(self):
        m = Evaluator()._zip(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        assert isinstance(m, MapV)
        assert [(k.data.tolist(), v.data.tolist()) for k, v in m.entries] == [([1.0], [3.0]), ([2.0], [4.0])]

    def test_reverse_of_squares(self):
        evaluator = Evaluator()
        inst = REGISTRY["map"].instance(Prod(Fun(REAL1, REAL1), Real(3)))
        transformed_square = Lam(
            "u", REAL1, Pair(Op("square", Var("u")), LOp("lmul", Op("add", Pair(Var("u"), Var("u"))), ())),
        )
        x = evaluator.eval({}, Pair(transformed_square, const([1.0, 2.0, 3.0])))
        (map_primal, _), (_, map_rev) = map_derivatives()
        np.testing.assert_array_equal(evaluator.eval({"x": x}, map_primal(Var("x"), inst, Fresh())).data, [1.0, 4.0, 9.0])
        out = evaluator.apply(evaluator.eval({"x": x}, map_rev(Var("x"), inst, Fresh())), RealVec.of(np.ones(3)))
        np.testing.assert_array_equal(out.right.data, [2.0, 4.0, 6.0])

    def test_derivative_types(self):
        inst = REGISTRY["map"].instance(Prod(Fun(REAL1, REAL1), Real(3)))
        ctx = {"x": Prod(Fun(REAL1, Prod(REAL1, LinFun(REAL1, REAL1))), Real(3))}
        (_, map_fwd), (_, map_rev) = map_derivatives()
        assert typecheck_target(ctx, map_fwd(Var("x"), inst, Fresh())) == LinFun(Prod(Fun(REAL1, REAL1), Real(3)), Real(3))
        assert typecheck_target(ctx, map_rev(Var("x"), inst, Fresh())) == LinFun(Real(3), Prod(MapT(REAL1, REAL1), Real(3)))
