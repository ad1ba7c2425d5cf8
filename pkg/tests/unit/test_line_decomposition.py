"""
Unit tests for M-complete tableaux.
"""

from fractions import Fraction

import pytest

from rcvf.errors import GuardExceeded, InconsistentInput, ZeroValuedTerm
from rcvf.line_decomposition import Piece, form_sign, form_value, m_complete_forms, rcvf3_tableau
from rcvf.ovf_core import INF, GammaVal, KPoly
from rcvf.rcvf_algorithms import LocalVariable


def g(value) -> GammaVal:
    return GammaVal.of(value)


@pytest.mark.unit
class TestForms:
    """Tests for integer linear forms in the member valuations."""

    def test_m_complete_enumeration(self):
        forms = m_complete_forms(2, 1)
        assert len(forms) == 8
        assert (0, 0) not in forms
        assert (1, -1) in forms

    def test_m_complete_guard(self):
        with pytest.raises(GuardExceeded):
            m_complete_forms(3, 10, limit=100)

    def test_m_complete_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            m_complete_forms(0, 1)
        with pytest.raises(ValueError):
            m_complete_forms(2, -1)

    def test_form_value(self):
        assert form_value((1, -1), [g(2), g(1)]) == 1
        assert form_value((0, 1), [INF, g(2)]) == 2

    def test_form_on_vanishing_member(self):
        with pytest.raises(ZeroValuedTerm):
            form_value((1, 0), [INF, g(0)])
        assert form_sign((1, 0), [INF, g(0)]) is None

    def test_form_sign(self):
        assert form_sign((2, -1), [g(1), g(2)]) == 0
        assert form_sign((1, -1), [g(0), g(2)]) == -1


@pytest.mark.unit
class TestPiece:
    """Tests for pieces of a local scale."""

    @pytest.mark.parametrize(
        ("low", "high", "expected"),
        [
            (None, Fraction(3), Fraction(2)),
            (Fraction(1), None, Fraction(2)),
            (None, None, Fraction(0)),
            (Fraction(1), Fraction(2), Fraction(3, 2)),
            (Fraction(1), Fraction(1), Fraction(1)),
        ],
    )
    def test_sample(self, low, high, expected):
        assert Piece(low, high, ()).sample() == expected

    def test_cut(self):
        assert Piece(Fraction(0), Fraction(0), ()).is_cut
        assert not Piece(None, Fraction(0), ()).is_cut


@pytest.mark.unit
class TestRcvf3Tableau:
    """Tests for the tableau refined by linear forms."""

    def test_valuation_of_x_cuts_at_zero(self):
        mvsc = rcvf3_tableau([KPoly.x()], [(0, 1)])
        assert len(mvsc.intervals) == 2
        right = mvsc.intervals[1]
        side = right.sides[0]
        assert side.variable == LocalVariable.TAU
        assert side.cuts == (Fraction(0),)
        assert [p.form_signs for p in side.pieces] == [(-1,), (0,), (1,)]

    def test_form_undefined_at_root(self):
        mvsc = rcvf3_tableau([KPoly.x()], [(0, 1)])
        assert mvsc.point_form_signs == ((None,),)

    def test_bounded_interval_without_cuts(self, sqrt_t_poly):
        base = rcvf3_tableau([sqrt_t_poly], [])
        p = base.base.polys.index(sqrt_t_poly)
        form = tuple(1 if j == p else 0 for j in range(len(base.base.polys)))
        mvsc = rcvf3_tableau([sqrt_t_poly], [form])
        between = mvsc.intervals[2]
        assert [s.variable for s in between.sides] == [LocalVariable.TAU1, LocalVariable.TAU2]
        assert between.cut_count == 0
        assert between.middle == (1,)

    def test_form_length_mismatch(self):
        with pytest.raises(InconsistentInput):
            rcvf3_tableau([KPoly.x()], [(1, 0, 0)])

    def test_no_forms(self):
        mvsc = rcvf3_tableau([KPoly.x()], [])
        assert all(len(side.pieces) == 1 for part in mvsc.intervals for side in part.sides)
