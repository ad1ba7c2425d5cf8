"""
Unit tests for the formula and polynomial parser.
"""

from fractions import Fraction

import pytest

from qe.formula import (
    And,
    Atom,
    Exists,
    Forall,
    Implies,
    Not,
    Or,
    Rel,
    evaluate_ground,
    format_formula,
    free_symbols,
    substitute,
)
from qe.parser import parse_formula, parse_kpolys, parse_polynomials, parse_rational, to_kpoly
from rcvf.errors import FormulaSyntaxError, StrictCoefficientError, UnboundSymbol
from rcvf.ovf_core import KPoly, OvfElem


@pytest.mark.unit
class TestParseFormula:
    """Tests for parsing formulas."""

    def test_existential_square_root(self):
        phi = parse_formula("exists x. (x^2 - a = 0 /\\ x >= 0)")
        assert isinstance(phi, Exists)
        assert phi.var == "x"
        assert isinstance(phi.body, And)
        assert [a.rel for a in phi.body.args] == [Rel.EQ, Rel.GE]
        assert free_symbols(phi) == {"a"}

    def test_divisibility_sugar(self):
        phi = parse_formula("x <<= t")
        assert isinstance(phi, Atom)
        assert phi.rel is Rel.DIV
        assert phi.rhs is not None
        assert phi.rhs.is_ground

    def test_relations_are_moved_to_zero(self):
        lt = parse_formula("x < 1")
        le = parse_formula("x <= 1")
        ne = parse_formula("x != 1")
        assert lt.rel is Rel.GT
        assert format_formula(lt) == "-x + 1 > 0"
        assert le.rel is Rel.GE
        assert isinstance(ne, Not)

    def test_connectives(self):
        phi = parse_formula("~(x > 0) \\/ x = 0 -> true")
        assert isinstance(phi, Implies)
        assert isinstance(phi.lhs, Or)
        assert isinstance(phi.lhs.args[0], Not)

    def test_conjunctions_flatten(self):
        phi = parse_formula("x > 0 /\\ x > 1 /\\ x > 2")
        assert isinstance(phi, And)
        assert len(phi.args) == 3

    def test_nested_quantifiers(self):
        phi = parse_formula("forall x. exists y. y > x")
        assert isinstance(phi, Forall)
        assert isinstance(phi.body, Exists)
        assert free_symbols(phi) == set()

    def test_rational_coefficients(self):
        phi = parse_formula("x/2 - 3/4 = 0")
        assert format_formula(phi) == "1/2*x - 3/4 = 0"

    def test_missing_body(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("exists x.")

    def test_error_carries_position(self):
        with pytest.raises(FormulaSyntaxError) as exc_info:
            parse_formula("x > > 0")
        assert exc_info.value.column is not None

    def test_quantifying_t(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("exists t. t > 0")

    def test_free_and_bound_clash(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("x > 0 /\\ (exists x. x > 1)")

    def test_undeclared_parameter(self):
        with pytest.raises(UnboundSymbol):
            parse_formula("x > a", parameters=["x"])

    def test_division_by_polynomial(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("1/x > 0")

    def test_bare_symbol_divisor(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("x - 3/t > 0")
        phi = parse_formula("x - (3)/(t) > 0")
        t = OvfElem.t()
        assert evaluate_ground(substitute(phi, {"x": 4 / t}))
        assert not evaluate_ground(substitute(phi, {"x": 2 / t}))

    def test_division_by_zero(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("x/0 > 0")

    def test_strict_coefficients(self):
        with pytest.raises(StrictCoefficientError):
            parse_formula("x - t > 0", strict=True)
        with pytest.raises(StrictCoefficientError):
            parse_formula("x/2 > 0", strict=True)
        assert isinstance(parse_formula("2*x - 1 > 0", strict=True), Atom)


@pytest.mark.unit
class TestParsePolynomials:
    """Tests for ground and parametrized polynomial input."""

    def test_shared_ring(self):
        r, polys = parse_polynomials(["a*x + b", "x^2"])
        assert [str(s) for s in r.symbols] == ["a", "b", "x"]
        assert len(polys) == 2

    def test_parse_kpolys(self, sqrt_t_poly):
        assert parse_kpolys(["x^2 - t"]) == [sqrt_t_poly]
        assert parse_kpolys(["2", "y - 1"]) == [KPoly.of([2]), KPoly.of([-1, 1])]

    def test_parse_kpolys_rejects_two_variables(self):
        with pytest.raises(UnboundSymbol):
            parse_kpolys(["x + y"])

    def test_to_kpoly_of_constant(self):
        _, (p,) = parse_polynomials(["t + 1"])
        assert to_kpoly(p, "x") == KPoly.of([OvfElem.t() + 1])

    def test_to_kpoly_unexpected_symbol(self):
        _, (p,) = parse_polynomials(["x + a"])
        with pytest.raises(UnboundSymbol):
            to_kpoly(p, "x")

    def test_syntax_error(self):
        with pytest.raises(FormulaSyntaxError):
            parse_polynomials(["x +"])


@pytest.mark.unit
class TestParseRational:
    """Tests for rational literals."""

    def test_parse(self):
        assert parse_rational("3/2") == Fraction(3, 2)
        assert parse_rational("-4") == Fraction(-4)

    @pytest.mark.parametrize("text", ["abc", "1/0"])
    def test_reject(self, text):
        with pytest.raises(FormulaSyntaxError):
            parse_rational(text)
