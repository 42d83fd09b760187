"""Exact series arithmetic: ring axioms, inversion, budgets, restriction."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from confhyp.expr import BudgetExhausted, Chart, RestrictionError


@pytest.fixture(scope="module")
def ch():
    return Chart(("r", "x1", "x2"), radial="r", order=6)


def poly_strategy(ch):
    coords = st.sampled_from(ch.coords)
    consts = st.fractions(min_value=-4, max_value=4, max_denominator=6)

    @st.composite
    def build(draw):
        e = ch.const(draw(consts))
        for _ in range(draw(st.integers(0, 3))):
            m = ch.const(draw(consts))
            for _ in range(draw(st.integers(1, 2))):
                m = m * ch.coord(draw(coords))
            e = e + m
        return e

    return build()


class TestRingAxioms:
    @settings(max_examples=25, deadline=None)
    @given(data=st.data())
    def test_associativity_and_distributivity(self, ch, data):
        s = poly_strategy(ch)
        a, b, c = data.draw(s), data.draw(s), data.draw(s)
        assert ((a + b) + c - (a + (b + c))).is_zero()
        assert (a * (b + c) - (a * b + a * c)).is_zero()
        assert (a * b - b * a).is_zero()

    @settings(max_examples=25, deadline=None)
    @given(data=st.data())
    def test_leibniz(self, ch, data):
        s = poly_strategy(ch)
        p, q = data.draw(s), data.draw(s)
        for name in ch.coords:
            lhs = (p * q).derive(name)
            rhs = p.derive(name) * q + q.derive(name) * p
            assert (lhs - rhs).is_zero()

    @settings(max_examples=20, deadline=None)
    @given(data=st.data())
    def test_mixed_partials_commute(self, ch, data):
        s = poly_strategy(ch)
        p = data.draw(s)
        for n1 in ch.coords:
            for n2 in ch.coords:
                d12 = p.derive(n1).derive(n2)
                d21 = p.derive(n2).derive(n1)
                assert (d12 - d21).is_zero()

    @settings(max_examples=20, deadline=None)
    @given(data=st.data())
    def test_evaluation_homomorphism(self, ch, data):
        s = poly_strategy(ch)
        p, q = data.draw(s), data.draw(s)
        pt = {"x1": Fraction(1, 3), "x2": Fraction(-2, 5)}
        lhs = (p * q + p).restrict_boundary().coeff(0).evaluate(pt)
        rhs = (p.restrict_boundary().coeff(0).evaluate(pt)
               * q.restrict_boundary().coeff(0).evaluate(pt)
               + p.restrict_boundary().coeff(0).evaluate(pt))
        assert lhs == rhs


class TestInversion:
    def test_inverse_to_truncation(self, ch):
        e = ch.one() + ch.coord("r") * ch.coord("x1") + ch.coord("x2")
        prod = e * e.invert() - ch.one()
        assert prod.is_zero()
        assert prod.prec == ch.prec_cap

    def test_laurent_offset_tracking(self, ch):
        r = ch.coord("r")
        e = (r ** 2 + r ** 5) / r
        assert e.vanishing_order() == 1
        assert e.laurent_offset == 0
        lau = ch.one() / (r ** 2)
        assert lau.laurent_offset == 2
        assert (lau * r ** 2 - ch.one()).is_zero()

    def test_zero_division(self, ch):
        with pytest.raises(ZeroDivisionError):
            ch.one().__truediv__(ch.zero())


class TestVanishingOrderAndRestriction:
    def test_examples(self, ch):
        r, x1 = ch.coord("r"), ch.coord("x1")
        assert (r ** 3 * x1).vanishing_order() == 3
        assert ch.zero().vanishing_order() is None
        e = ch.one() + r * x1
        assert (e.restrict_boundary() - ch.boundary().one()).is_zero()
        assert (r ** 2).restrict_boundary().is_zero()

    def test_negative_power_restriction_fails(self, ch):
        r = ch.coord("r")
        with pytest.raises(RestrictionError):
            (ch.one() / r).restrict_boundary()

    def test_budget_consumption(self, ch):
        e = ch.coord("r") ** 2 * ch.coord("x1")
        cur = e * (ch.one() + ch.coord("r")).invert()  # prec = cap + 2
        for _ in range(cur.prec):
            cur = cur.derive("r")
        assert cur.prec == 0
        with pytest.raises(BudgetExhausted):
            cur.derive("r")
        with pytest.raises(BudgetExhausted):
            cur.restrict_boundary()


class TestSqrt:
    def test_series_sqrt(self, ch):
        e = (ch.one() + ch.coord("x1")) ** 2 + ch.coord("r") * ch.coord("x2")
        s = e.sqrt()
        assert (s * s - e).is_zero()

    def test_pure_even_power(self, ch):
        r = ch.coord("r")
        e = r ** 4 * Fraction(9, 4)
        s = e.sqrt()
        assert (s - r ** 2 * Fraction(3, 2)).is_zero()

    def test_odd_order_fails(self, ch):
        with pytest.raises(ArithmeticError):
            ch.coord("r").sqrt()
