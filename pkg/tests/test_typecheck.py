import pytest

from lamdiff.errors import LinearityShapeError, TypeCheckError, TypeMismatch, UnboundVariable, UnknownOp
from lamdiff.sexpr import parse_term
from lamdiff.syntax import (
    Fst,
    Lam,
    LComp,
    LCurryInv,
    LId,
    LOp,
    LPair,
    LSing,
    LSwap,
    Let,
    Op,
    Pair,
    UnitVal,
    Var,
    Zero,
    const,
)
from lamdiff.typecheck import typecheck_source, typecheck_target
from lamdiff.types import REAL1, UNIT, Fun, LinFun, MapT, Prod, Real


class TestSourceTyping:
    def test_variable(self):
        assert typecheck_source({"x": Real(3)}, Var("x")) == Real(3)

    def test_mul2(self):
        assert typecheck_source({"x": Real(2)}, Op("mul2", Var("x"))) == REAL1

    def test_lambda_and_let(self):
        term = parse_term("(let (f (lam (x (real 2)) (op sum x))) (pair f (app f arg)))")
        assert typecheck_source({"arg": Real(2)}, term) == Prod(Fun(Real(2), REAL1), REAL1)

    def test_const_width_follows_parameters(self):
        assert typecheck_source({}, const([1.0, 2.0, 3.0])) == Real(3)

    def test_projection_of_non_product(self):
        with pytest.raises(TypeMismatch):
            typecheck_source({"x": REAL1}, Fst(Var("x")))

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariable) as info:
            typecheck_source({}, Var("y"))
        assert info.value.name == "y"

    def test_unknown_operation(self):
        with pytest.raises(UnknownOp):
            typecheck_source({"x": REAL1}, Op("tanh", Var("x")))

    def test_operation_shape_error_keeps_location(self):
        term = parse_term("(op add (pair (const 1.0) (const 1.0 2.0)))")
        with pytest.raises(TypeMismatch) as info:
            typecheck_source({}, term)
        assert info.value.location == (1, 1)
        assert str(info.value).startswith("1:1: ")

    def test_map_needs_scalar_function(self):
        term = parse_term("(op map (pair (lam (u (real 2)) u) arg))")
        with pytest.raises(TypeMismatch):
            typecheck_source({"arg": Real(2)}, term)

    def test_target_terms_are_rejected(self):
        with pytest.raises(TypeCheckError):
            typecheck_source({}, Zero(REAL1))
        with pytest.raises(TypeCheckError):
            typecheck_source({}, Lam("x", LinFun(REAL1, REAL1), UnitVal()))

    def test_deterministic(self):
        term = parse_term("(app (lam (x (real 2)) (op mul2 x)) arg)")
        ctx = {"arg": Real(2)}
        assert typecheck_source(ctx, term) == typecheck_source(ctx, term) == REAL1


class TestTargetTyping:
    def test_identity(self):
        assert typecheck_target({}, LId(Real(2))) == LinFun(Real(2), Real(2))

    def test_lpair(self):
        sigma, tau = Real(2), Real(3)
        term = LPair(LId(sigma), Zero(LinFun(sigma, tau)))
        assert typecheck_target({}, term) == LinFun(sigma, Prod(sigma, tau))

    def test_lcurryinv(self):
        sigma, tau = Real(2), Real(3)
        term = LCurryInv(Lam("x", tau, LId(sigma)), sigma)
        assert typecheck_target({}, term) == LinFun(MapT(tau, sigma), sigma)

    def test_lcurryinv_result_type_must_match(self):
        with pytest.raises(TypeMismatch):
            typecheck_target({}, LCurryInv(Lam("x", REAL1, LId(REAL1)), Real(2)))

    def test_lsing(self):
        assert typecheck_target({"t": Real(3)}, LSing(Var("t"), UNIT)) == LinFun(UNIT, MapT(Real(3), UNIT))

    def test_lswap(self):
        family = Lam("x", Real(3), LOp("lmul", const([1.0, 2.0])))
        assert typecheck_target({}, LSwap(family)) == LinFun(Real(2), Fun(Real(3), Real(2)))

    def test_lcomp_seam(self):
        with pytest.raises(LinearityShapeError):
            typecheck_target({}, LComp(LId(REAL1), LId(Real(2))))

    def test_linear_op_parameter_shape(self):
        with pytest.raises(LinearityShapeError):
            typecheck_target({}, LOp("lmul", UnitVal()))

    def test_lambda_may_carry_target_types(self):
        term = Lam("f", LinFun(REAL1, REAL1), Pair(Var("f"), UnitVal()))
        assert typecheck_target({}, term) == Fun(LinFun(REAL1, REAL1), Prod(LinFun(REAL1, REAL1), UNIT))

    def test_let_bound_linear_function(self):
        term = Let("g", LId(REAL1), LComp(Var("g"), Var("g")))
        assert typecheck_target({}, term) == LinFun(REAL1, REAL1)
