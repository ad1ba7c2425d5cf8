"""
Unit tests for definable subsets of the line.
"""

from fractions import Fraction

import pytest

from qe.line_set import decompose_line_set, holds_at, partition_line
from qe.parser import parse_formula
from rcvf.errors import InconsistentInput, UnboundSymbol, UnknownRoot
from rcvf.line_decomposition import LineKind, sample_point
from rcvf.ovf_core import KPoly
from rcvf.tableau import thom_code

SMALL_POSITIVE = "x > 0 /\\ 1 <<= x /\\ x <<= t"
UNIT_INTERVAL = (
    "x > 0 /\\ 1 - x > 0 /\\ 1 <<= x /\\ x <<= 1 /\\ 1 <<= 1 - x /\\ 1 - x <<= 1"
)


@pytest.mark.unit
class TestDecomposeLineSet:
    """Tests for the decomposition into points and (<,⪯)-intervals."""

    def test_small_positive_numbers(self):
        line_set = decompose_line_set(parse_formula(SMALL_POSITIVE))
        assert line_set.points == ()
        assert [(i.kind, i.low, i.high) for i in line_set.intervals] == [
            (LineKind.IPLUS, Fraction(1), Fraction(1)),
            (LineKind.IPLUS, Fraction(0), Fraction(1)),
            (LineKind.IPLUS, Fraction(0), Fraction(0)),
        ]
        assert [str(i) for i in line_set.intervals] == [
            "I+([X ; ], 1)",
            "I+([X ; ], 0, 1)",
            "I+([X ; ], 0)",
        ]

    def test_single_point(self, sqrt_t_poly):
        line_set = decompose_line_set(parse_formula("x^2 - t = 0 /\\ x > 0"))
        assert line_set.points == (thom_code(sqrt_t_poly, (1,)),)
        assert line_set.intervals == ()

    def test_middle_of_unit_interval(self):
        line_set = decompose_line_set(parse_formula(UNIT_INTERVAL))
        assert line_set.points == ()
        assert len(line_set.intervals) == 1
        middle = line_set.intervals[0]
        assert middle.kind is LineKind.JMID
        assert str(middle) == "J([X ; ], [X - 1 ; ])"

    def test_partition_covers_the_line(self):
        _, pieces = partition_line(parse_formula("x > 0"))
        kinds = [p.interval.kind for p in pieces]
        assert kinds == [LineKind.IMINUS, LineKind.POINT, LineKind.IPLUS]
        assert [p.satisfied for p in pieces] == [False, False, True]

    def test_other_variable_name(self):
        line_set = decompose_line_set(parse_formula("y >= 0"), variable="y")
        assert line_set.points == (thom_code(KPoly.x(), ()),)
        assert [i.kind for i in line_set.intervals] == [LineKind.IPLUS]

    def test_quantified_description(self):
        with pytest.raises(InconsistentInput):
            decompose_line_set(parse_formula("exists y. y > x"))

    def test_extra_symbol(self):
        with pytest.raises(UnboundSymbol):
            decompose_line_set(parse_formula("x > a"))


@pytest.mark.unit
class TestSamplePoints:
    """Tests for exact sample points of the pieces."""

    @pytest.mark.parametrize("text", [SMALL_POSITIVE, UNIT_INTERVAL, "x > 0"])
    def test_samples_agree_with_truth(self, text):
        phi = parse_formula(text)
        mvsc, pieces = partition_line(phi)
        for piece in pieces:
            point = sample_point(piece.interval, mvsc.base)
            assert holds_at(phi, point) == piece.satisfied, str(piece.interval)

    def test_fractional_scale(self):
        phi = parse_formula(SMALL_POSITIVE)
        mvsc, pieces = partition_line(phi)
        open_piece = next(
            p for p in pieces if p.interval.low == 0 and p.interval.high == 1
        )
        assert sample_point(open_piece.interval, mvsc.base).q == 2

    def test_algebraic_anchor(self):
        phi = parse_formula("x^2 - t > 0")
        mvsc, pieces = partition_line(phi)
        last = pieces[-1]
        with pytest.raises(UnknownRoot):
            sample_point(last.interval, mvsc.base)
