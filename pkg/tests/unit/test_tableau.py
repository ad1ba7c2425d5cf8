"""
Unit tests for closed families, Thom codes and complete sign tableaux.
"""

import pytest

from rcvf.errors import InvalidCode, UnknownPoly, UnknownRoot
from rcvf.ovf_core import KPoly
from rcvf.tableau import (
    Ordering,
    close_family,
    compare_roots,
    locate_code,
    parse_sigma,
    restrict,
    sign_at_code,
    sign_at_root,
    tableau_of,
    thom_code,
)


@pytest.mark.unit
class TestCloseFamily:
    """Tests for closure under derivative and remainder."""

    def test_members_sorted_by_degree(self, sqrt_t_poly, t):
        family = close_family([sqrt_t_poly])
        assert [p.degree for p in family.polys] == [0, 0, 1, 2]
        assert KPoly.of([0, 2]) in family.polys
        assert KPoly.of([-t]) in family.polys
        assert family.index(sqrt_t_poly) == 3

    def test_provenance(self, sqrt_t_poly):
        family = close_family([sqrt_t_poly])
        assert family.inputs == {0: 3}
        assert family.provenance[family.index(KPoly.of([0, 2]))] == ("derivative", 3)
        assert family.derivative[3] == family.index(KPoly.of([0, 2]))

    def test_zero_inputs_are_skipped(self):
        family = close_family([KPoly.of([]), KPoly.x()])
        assert family.polys == (KPoly.of([1]), KPoly.x())

    def test_unknown_member(self, sqrt_t_poly):
        with pytest.raises(UnknownPoly):
            close_family([sqrt_t_poly]).index(KPoly.of([5, 1]))

    def test_constants(self, sqrt_t_poly):
        assert close_family([sqrt_t_poly]).constants == (0, 1)


@pytest.mark.unit
class TestThomCode:
    """Tests for Thom code construction."""

    def test_signs_normalized_to_monic(self):
        code = thom_code(KPoly.of([1, 0, -1]), (1,))
        assert code.poly == KPoly.of([-1, 0, 1])
        assert code.sigma == (-1,)

    def test_wrong_length(self, sqrt_t_poly):
        with pytest.raises(InvalidCode):
            thom_code(sqrt_t_poly, ())

    def test_constant_has_no_code(self):
        with pytest.raises(InvalidCode):
            thom_code(KPoly.of([3]), ())

    def test_parse_sigma(self):
        assert parse_sigma("+-0") == (1, -1, 0)
        with pytest.raises(ValueError):
            parse_sigma("+x")

    def test_str(self, sqrt_t_poly):
        assert str(thom_code(sqrt_t_poly, (1,))) == "[X^2 + (-t) ; +]"


@pytest.mark.unit
class TestSignTableau:
    """Tests for the Cohen-Hörmander tableau."""

    def test_roots_of_x_squared_minus_t(self, sqrt_t_poly):
        tableau = tableau_of([sqrt_t_poly])
        assert tableau.roots == (
            thom_code(sqrt_t_poly, (-1,)),
            thom_code(KPoly.x(), ()),
            thom_code(sqrt_t_poly, (1,)),
        )
        p = tableau.family.index(sqrt_t_poly)
        assert tableau.point_signs[p] == (0, -1, 0)
        assert tableau.interval_signs[p] == (1, -1, -1, 1)

    def test_constant_rows(self, sqrt_t_poly, t):
        tableau = tableau_of([sqrt_t_poly])
        minus_t = tableau.family.index(KPoly.of([-t]))
        assert tableau.point_signs[minus_t] == (-1, -1, -1)
        assert tableau.interval_signs[minus_t] == (-1, -1, -1, -1)

    def test_infinitesimal_roots(self, two_roots_poly, t):
        tableau = tableau_of([two_roots_poly])
        x_minus_t = KPoly.of([-t, 1])
        assert len(tableau.roots) == 3
        assert sign_at_code(x_minus_t, tableau.roots[0]) == 0
        assert sign_at_code(KPoly.of([-1, 1]), tableau.roots[2]) == 0

    def test_root_index(self, sqrt_t_poly):
        tableau = tableau_of([sqrt_t_poly])
        assert tableau.root_index(thom_code(sqrt_t_poly, (1,))) == 2
        with pytest.raises(UnknownRoot):
            tableau.root_index(thom_code(KPoly.of([-1, 1]), ()))

    def test_sign_at_root(self, sqrt_t_poly):
        tableau = tableau_of([sqrt_t_poly])
        derivative = KPoly.of([0, 2])
        assert sign_at_root(derivative, thom_code(sqrt_t_poly, (-1,)), tableau) == -1

    def test_no_real_roots(self):
        tableau = tableau_of([KPoly.of([1, 0, 1])])
        assert len(tableau.roots) == 1
        assert tableau.roots[0] == thom_code(KPoly.x(), ())
        p = tableau.family.index(KPoly.of([1, 0, 1]))
        assert set(tableau.interval_signs[p]) == {1}


@pytest.mark.unit
class TestCodedRoots:
    """Tests for sign queries and comparisons at coded roots."""

    def test_sign_at_code(self, sqrt_t_poly):
        assert sign_at_code(KPoly.x(), thom_code(sqrt_t_poly, (-1,))) == -1
        assert sign_at_code(KPoly.of([-1, 1]), thom_code(sqrt_t_poly, (1,))) == -1

    def test_sign_of_small_difference(self, sqrt_t_poly, t):
        root = thom_code(sqrt_t_poly, (1,))
        assert sign_at_code(KPoly.of([-t, 1]), root) == 1

    def test_compare_roots(self, sqrt_t_poly):
        negative = thom_code(sqrt_t_poly, (-1,))
        positive = thom_code(sqrt_t_poly, (1,))
        zero = thom_code(KPoly.x(), ())
        assert compare_roots(negative, zero) == Ordering.LT
        assert compare_roots(positive, zero) == Ordering.GT
        assert compare_roots(positive, positive) == Ordering.EQ

    def test_code_without_root(self):
        code = thom_code(KPoly.of([1, 0, 1]), (1,))
        tableau = tableau_of([code.poly])
        with pytest.raises(InvalidCode):
            locate_code(tableau, code)


@pytest.mark.unit
class TestRestrict:
    """Tests for restricting a tableau to some members."""

    def test_restrict_to_input(self, sqrt_t_poly):
        tableau = tableau_of([sqrt_t_poly])
        p = tableau.family.index(sqrt_t_poly)
        points, point_signs, interval_signs = restrict(tableau, [p])
        assert points == (0, 2)
        assert point_signs == ((0, 0),)
        assert interval_signs == ((1, -1, 1),)

    def test_restrict_to_constant(self):
        tableau = tableau_of([KPoly.x()])
        one = tableau.family.index(KPoly.of([1]))
        points, _, interval_signs = restrict(tableau, [one])
        assert points == ()
        assert interval_signs == ((1,),)
