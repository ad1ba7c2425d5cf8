"""
Unit tests for ordered valued field arithmetic over Q(t).
"""

from fractions import Fraction

import pytest

from rcvf.errors import DegreeOrder, NotInValuationRing, NotMonic, RNotInvertible
from rcvf.ovf_core import (
    INF,
    ZERO_VAL,
    GammaVal,
    KPoly,
    OvfElem,
    kpoly_divided_derivative,
    kpoly_pseudo_rem,
    ovf_preceq,
    ovf_residue,
    ovf_sign,
    ovf_val,
    pseudo_rem_exponent,
    tschirnhaus_charpoly,
    tschirnhaus_rational,
    tschirnhaus_ring,
)


@pytest.mark.unit
class TestGammaVal:
    """Tests for the value group with +inf."""

    def test_ordering_puts_inf_last(self):
        values = [INF, GammaVal.of(2), GammaVal.of(Fraction(-1, 2)), ZERO_VAL]
        assert sorted(values) == [GammaVal.of(Fraction(-1, 2)), ZERO_VAL, GammaVal.of(2), INF]

    def test_parse_from_text(self):
        assert GammaVal.of("inf") == INF
        assert GammaVal.of("3/2").finite == Fraction(3, 2)

    def test_inf_absorbs_addition(self):
        assert INF + 3 == INF
        assert GammaVal.of(1) + GammaVal.of(Fraction(1, 2)) == GammaVal.of(Fraction(3, 2))

    def test_subtracting_inf_is_rejected(self):
        with pytest.raises(ValueError):
            GammaVal.of(1) - INF

    def test_scale(self):
        assert GammaVal.of(3).scale(Fraction(1, 2)) == GammaVal.of(Fraction(3, 2))
        assert INF.scale(2) == INF
        with pytest.raises(ValueError):
            INF.scale(-1)

    def test_finite_of_inf_raises(self):
        with pytest.raises(ValueError):
            INF.finite


@pytest.mark.unit
class TestOvfElem:
    """Tests for sign, valuation and residue in Q(t)."""

    def test_sign_follows_lowest_order_term(self, t):
        assert ovf_sign(t) == 1
        assert ovf_sign(-t) == -1
        assert ovf_sign(t - t**2) == 1
        assert ovf_sign(t**2 - t) == -1
        assert ovf_sign(OvfElem.of(0)) == 0

    def test_t_is_below_every_positive_rational(self, t):
        assert ovf_sign(OvfElem.of(Fraction(1, 1000)) - t) == 1

    def test_sign_of_quotient(self, t):
        assert ovf_sign(OvfElem.of(-1) / (t - 1)) == 1

    def test_valuation(self, t):
        assert ovf_val(t**3) == GammaVal.of(3)
        assert ovf_val(1 / t) == GammaVal.of(-1)
        assert ovf_val((t + t**2) / (1 - t)) == GammaVal.of(1)
        assert ovf_val(OvfElem.of(0)) == INF

    def test_preceq(self, t):
        assert ovf_preceq(OvfElem.of(1), t)
        assert not ovf_preceq(t, OvfElem.of(5))
        assert ovf_preceq(OvfElem.of(3), OvfElem.of(-2))

    def test_residue(self, t):
        assert ovf_residue((3 + t) / (2 - t)) == Fraction(3, 2)
        assert ovf_residue(t) == 0

    def test_residue_outside_valuation_ring(self, t):
        with pytest.raises(NotInValuationRing):
            ovf_residue(1 / t)

    def test_division_by_zero(self, t):
        with pytest.raises(ZeroDivisionError):
            t / 0

    def test_specialize(self, t):
        assert ((1 + t) / (1 - t)).specialize(Fraction(1, 2)) == 3
        with pytest.raises(ZeroDivisionError):
            (1 / (1 - t)).specialize(Fraction(1))

    def test_rational_detection(self, t):
        assert OvfElem.of(Fraction(3, 4)).is_rational
        assert OvfElem.of(Fraction(3, 4)).to_rational() == Fraction(3, 4)
        assert not t.is_rational

    def test_normalized_parts(self, t):
        x = t / (2 - 2 * t)
        assert x.den == {0: Fraction(1), 1: Fraction(-1)}
        assert x.num == {1: Fraction(1, 2)}


@pytest.mark.unit
class TestKPoly:
    """Tests for polynomials over K."""

    def test_trailing_zeros_are_stripped(self):
        assert KPoly.of([1, 2, 0, 0]).degree == 1
        assert KPoly.of([0]).is_zero

    def test_evaluate(self, t, sqrt_t_poly):
        assert sqrt_t_poly.evaluate(t).value == (t**2 - t).value
        assert KPoly.of([]).evaluate(3).is_zero

    def test_arithmetic(self):
        x = KPoly.x()
        assert (x + KPoly.constant(1)) * (x - KPoly.constant(1)) == KPoly.of([-1, 0, 1])
        assert (x**3).degree == 3
        assert -x == KPoly.of([0, -1])

    def test_derivatives(self):
        p = KPoly.of([1, 1, 1, 1])
        assert p.derivative() == KPoly.of([1, 2, 3])
        assert kpoly_divided_derivative(p, 2) == KPoly.of([1, 3])
        assert p.divided_derivative(3) == KPoly.of([1])

    def test_negative_derivative_order(self):
        with pytest.raises(ValueError):
            kpoly_divided_derivative(KPoly.x(), -1)

    def test_monic_and_mirror(self, t):
        p = KPoly.of([1, 0, 2 * t])
        assert p.monic().is_monic
        assert KPoly.of([1, 2, 3]).mirror() == KPoly.of([1, -2, 3])

    def test_shift(self):
        assert KPoly.of([0, 0, 1]).shift(1) == KPoly.of([1, 2, 1])

    def test_remainder(self, t, sqrt_t_poly):
        assert sqrt_t_poly.rem(KPoly.of([0, 2])) == KPoly.of([-t])

    def test_strip_zero_roots(self):
        stripped, n = KPoly.of([0, 0, 3, 1]).strip_zero_roots()
        assert n == 2
        assert stripped == KPoly.of([3, 1])

    def test_str(self, sqrt_t_poly):
        assert str(KPoly.of([-1, 0, 1])) == "X^2 - 1"
        assert str(sqrt_t_poly) == "X^2 + (-t)"
        assert str(KPoly.of([])) == "0"


@pytest.mark.unit
class TestPseudoRemainder:
    """Tests for pseudo-remainders with even exponents."""

    def test_exponent_is_even(self):
        assert pseudo_rem_exponent(KPoly.of([0, 0, 1]), KPoly.of([0, 1])) == 2
        assert pseudo_rem_exponent(KPoly.of([0, 0, 0, 1]), KPoly.of([0, 1])) == 4

    def test_sign_is_preserved(self, t):
        p = KPoly.of([1, 0, 1])
        q = KPoly.of([1, -t])
        r = kpoly_pseudo_rem(p, q)
        exact = p.rem(q)
        assert r.degree == 0
        assert ovf_sign(r.coeff(0)) == ovf_sign(exact.coeff(0))

    def test_degree_order_violation(self):
        with pytest.raises(DegreeOrder):
            kpoly_pseudo_rem(KPoly.x(), KPoly.of([0, 0, 1]))
        with pytest.raises(DegreeOrder):
            kpoly_pseudo_rem(KPoly.x(), KPoly.constant(2))


@pytest.mark.unit
class TestTschirnhaus:
    """Tests for Tschirnhaus transforms through characteristic polynomials."""

    def test_identity_transform_returns_the_polynomial(self):
        _, (y1,) = tschirnhaus_ring(1)
        p = KPoly.of([-2, 0, 1])
        assert tschirnhaus_charpoly([p], y1) == p

    def test_square_of_roots(self):
        _, (y1,) = tschirnhaus_ring(1)
        p = KPoly.of([-2, 0, 1])
        assert tschirnhaus_charpoly([p], y1**2) == KPoly.of([4, -4, 1])

    def test_sum_of_roots_of_two_polynomials(self):
        _, (y1, y2) = tschirnhaus_ring(2)
        p = KPoly.of([-1, 1])
        q = KPoly.of([-2, 1])
        assert tschirnhaus_charpoly([p, q], y1 + y2) == KPoly.of([-3, 1])

    def test_rational_transform(self):
        _, (y1,) = tschirnhaus_ring(1)
        p = KPoly.of([-2, 1])
        assert tschirnhaus_rational([p], y1.ring.one, y1) == KPoly.of([Fraction(-1, 2), 1])

    def test_non_monic_input(self):
        _, (y1,) = tschirnhaus_ring(1)
        with pytest.raises(NotMonic):
            tschirnhaus_charpoly([KPoly.of([1, 2])], y1)

    def test_singular_denominator(self):
        _, (y1,) = tschirnhaus_ring(1)
        with pytest.raises(RNotInvertible):
            tschirnhaus_rational([KPoly.of([0, 0, 1])], y1.ring.one, y1)
