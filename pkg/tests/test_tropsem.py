from fractions import Fraction as F

import pytest

from tropsys.tropsem import (BOTTOM, EPS, Nabla, PolySystem, Rel, TropicalPolynomial, TropicalScalar,
                             TwoSided, format_scalar, glex_sorted, parse_scalar, poly, scalar, tadd,
                             tmul, tsum)


def test_bottom_is_absorbing_for_product_and_neutral_for_sum():
    assert tmul(BOTTOM, 5).is_bottom
    assert tadd(BOTTOM, 5) == scalar(5)
    assert tsum([]) is BOTTOM


def test_eps_is_positive_but_below_every_positive_rational():
    assert scalar(0) < EPS < scalar(F(1, 10**9))
    assert scalar(3) - EPS < scalar(3)


@pytest.mark.parametrize("text", ["0", "-7/3", "51/10+9/10*eps", "0-eps", "2+eps", "-inf"])
def test_scalar_text_round_trip(text):
    assert format_scalar(parse_scalar(text)) == text


def test_instantiate_substitutes_eps():
    assert TropicalScalar(1, -2).instantiate(F(1, 4)) == F(1, 2)
    with pytest.raises(ValueError):
        BOTTOM.instantiate(1)


def test_glex_orders_by_degree_then_x1_first():
    assert glex_sorted([(0, 1), (1, 1), (0, 0), (1, 0), (0, 2), (2, 0)]) == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_polynomial_merges_duplicate_exponents_by_max():
    f = TropicalPolynomial(1, {(1,): 2})
    g = f.max_with(TropicalPolynomial(1, {(1,): 5, (0,): 0}))
    assert g[(1,)] == scalar(5) and g[(0,)] == scalar(0)


def test_evaluate_argmax_and_root():
    f = poly(2, {(0, 0): 0, (1, 0): 0, (0, 1): 1})
    assert f.evaluate((0, -1)) == scalar(0)
    assert f.argmax_set((0, -1)) == {(0, 0), (1, 0), (0, 1)}
    assert f.is_root((0, -1))
    assert not f.is_root((1, -5))


def test_relations():
    plus = poly(1, {(1,): 0})
    minus = poly(1, {(0,): 2})
    assert TwoSided(plus, Rel.GEQ, minus).holds((2,))
    assert not TwoSided(plus, Rel.GT, minus).holds((2,))
    assert TwoSided(plus, Rel.EQ, minus).holds((2,))
    assert Nabla(poly(1, {(0,): 0, (1,): 0})).holds((0,))


def test_system_violated_lists_failing_relations():
    s = PolySystem(1, (Nabla(poly(1, {(0,): 0, (1,): 0})),
                       TwoSided(poly(1, {(1,): 0}), Rel.GT, poly(1, {(0,): 0}))))
    assert s.violated((0,)) == [1]
    assert s.is_nabla is False
