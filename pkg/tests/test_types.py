import pytest

from lamdiff.errors import NonFirstOrderType
from lamdiff.types import (
    REAL1,
    UNIT,
    Fun,
    LinFun,
    MapT,
    Prod,
    Real,
    is_first_order,
    is_source_type,
    type_translate_fwd,
    type_translate_rev,
    width,
)

FIRST_ORDER = [REAL1, Real(4), UNIT, Prod(Real(2), UNIT), Prod(Prod(REAL1, Real(3)), Real(2))]


class TestTypes:
    def test_real_width_must_be_positive(self):
        with pytest.raises(ValueError):
            Real(0)

    def test_printing(self):
        assert str(Prod(REAL1, Fun(UNIT, Real(2)))) == "(prod (real 1) (fun unit (real 2)))"
        assert str(MapT(REAL1, LinFun(REAL1, UNIT))) == "(map (real 1) (linfun (real 1) unit))"

    def test_first_order(self):
        assert all(is_first_order(ty) for ty in FIRST_ORDER)
        assert not is_first_order(Fun(REAL1, REAL1))
        assert not is_first_order(Prod(REAL1, Fun(REAL1, REAL1)))

    def test_source_types_exclude_target_constructors(self):
        assert is_source_type(Fun(Prod(REAL1, UNIT), REAL1))
        assert not is_source_type(LinFun(REAL1, REAL1))
        assert not is_source_type(Prod(REAL1, MapT(REAL1, REAL1)))

    def test_width(self):
        assert width(Prod(Real(2), Prod(UNIT, Real(3)))) == 5
        assert width(UNIT) == 0
        with pytest.raises(NonFirstOrderType):
            width(Fun(REAL1, REAL1))


class TestTypeTranslation:
    @pytest.mark.parametrize("ty", FIRST_ORDER, ids=str)
    def test_first_order_types_are_their_own_tangents(self, ty):
        assert type_translate_fwd(ty) == (ty, ty)
        assert type_translate_rev(ty) == (ty, ty)

    def test_forward_function_type(self):
        primal, tangent = type_translate_fwd(Fun(Real(2), Real(3)))
        assert primal == Fun(Real(2), Prod(Real(3), LinFun(Real(2), Real(3))))
        assert tangent == Fun(Real(2), Real(3))

    def test_reverse_function_type(self):
        primal, adjoint = type_translate_rev(Fun(Real(2), Real(3)))
        assert primal == Fun(Real(2), Prod(Real(3), LinFun(Real(3), Real(2))))
        assert adjoint == MapT(Real(2), Real(3))

    def test_translation_is_componentwise_on_products(self):
        ty = Prod(REAL1, Fun(REAL1, REAL1))
        primal, adjoint = type_translate_rev(ty)
        assert primal == Prod(REAL1, type_translate_rev(Fun(REAL1, REAL1))[0])
        assert adjoint == Prod(REAL1, MapT(REAL1, REAL1))

    def test_higher_order_argument(self):
        inner = Fun(REAL1, REAL1)
        primal, tangent = type_translate_fwd(Fun(inner, REAL1))
        inner1, inner2 = type_translate_fwd(inner)
        assert primal == Fun(inner1, Prod(REAL1, LinFun(inner2, REAL1)))
        assert tangent == Fun(inner1, REAL1)

    def test_target_types_are_rejected(self):
        with pytest.raises(NonFirstOrderType):
            type_translate_fwd(LinFun(REAL1, REAL1))
