"""
Unit tests for parametrized tableaux and their case trees.
"""

import pytest

from qe.case_tree import (
    Assumptions,
    CaseBranch,
    CaseLeaf,
    NeedSign,
    PPoly,
    parametrized_tableau,
    ppoly_of,
)
from qe.parser import parse_polynomials
from rcvf.errors import BranchLimitExceeded
from rcvf.ovf_core import OvfElem


@pytest.fixture
def linear():
    """a*x + b over the parameters a and b."""
    r, (p,) = parse_polynomials(["a*x + b"])
    return r, p


@pytest.mark.unit
class TestPPoly:
    """Tests for polynomials with parameter coefficients."""

    def test_coefficients(self, linear):
        r, p = linear
        a, b, _ = r.gens
        assert ppoly_of(p, "x").coeffs == (b, a)

    def test_trailing_zeros_are_dropped(self, linear):
        r, _ = linear
        a, _, _ = r.gens
        assert PPoly((a, r.zero)).degree == 0

    def test_derivative(self, linear):
        r, p = linear
        a, _, _ = r.gens
        assert ppoly_of(p, "x").derivative() == PPoly((a,))

    def test_pseudo_remainder_exponent_is_even(self):
        r, (p, q) = parse_polynomials(["x^2 + b", "a*x + 1"])
        rem, e = ppoly_of(p, "x").pseudo_rem(ppoly_of(q, "x"))
        assert e % 2 == 0
        assert rem.degree <= 0

    def test_settle_drops_vanishing_leading_coefficient(self, linear):
        r, p = linear
        a, b, _ = r.gens
        settled = ppoly_of(p, "x").settle(Assumptions({a: 0, b: 1}))
        assert settled.degree == 0

    def test_render(self, linear):
        _, p = linear
        assert ppoly_of(p, "x").render("x") == "(a)*x + b"


@pytest.mark.unit
class TestAssumptions:
    """Tests for the branch sign oracle."""

    def test_unknown_sign_opens_a_branch(self, linear):
        r, _ = linear
        a, _, _ = r.gens
        with pytest.raises(NeedSign):
            Assumptions().sign(a)

    def test_scaled_keys(self, linear):
        r, _ = linear
        a, _, _ = r.gens
        oracle = Assumptions({a: 1})
        assert oracle.sign(-2 * a) == -1
        assert oracle.sign(r(3)) == 1

    def test_zero_divides(self, linear):
        r, _ = linear
        a, b, _ = r.gens
        assert Assumptions({a: 0}).sign(a * b) == 0


@pytest.mark.unit
class TestParametrizedTableau:
    """Tests for case trees over parameter signs."""

    def test_monic_input_needs_no_split(self):
        r, (p,) = parse_polynomials(["x - a"])
        tree = parametrized_tableau([p], "x")
        assert isinstance(tree.root, CaseLeaf)
        assert tree.leaf_count == 1

    def test_split_on_leading_coefficient(self, linear):
        r, p = linear
        a, _, _ = r.gens
        tree = parametrized_tableau([p], "x")
        assert isinstance(tree.root, CaseBranch)
        assert tree.root.query == a
        assert [s for s, _ in tree.root.children] == [-1, 0, 1]

    def test_leaf_conditions(self, linear):
        r, p = linear
        a, _, _ = r.gens
        leaves = list(parametrized_tableau([p], "x").leaves())
        assert leaves[0].conditions == ((a, -1),)
        assert leaves[-1].conditions == ((a, 1),)

    def test_assumptions_prune_the_tree(self, linear):
        r, p = linear
        a, _, _ = r.gens
        tree = parametrized_tableau([p], "x", assumptions={a: 1})
        assert tree.leaf_count == 1

    def test_branch_guard(self, linear):
        _, p = linear
        with pytest.raises(BranchLimitExceeded):
            parametrized_tableau([p], "x", max_branches=1)

    def test_json_is_deterministic(self, linear):
        _, p = linear
        first = parametrized_tableau([p], "x").to_json()
        second = parametrized_tableau([p], "x").to_json()
        assert first == second
        assert first["variable"] == "x"
        assert first["root"]["query"] == "a"
        assert set(first["root"]["children"]) == {"-", "0", "+"}

    def test_leaf_json(self):
        _, (p,) = parse_polynomials(["x - a"])
        out = parametrized_tableau([p], "x").to_json()["root"]
        assert out["conditions"] == []
        assert len(out["point_signs"]) == len(out["members"])

    def test_leaf_at_follows_parameter_signs(self, linear):
        r, p = linear
        a, _, _ = r.gens
        tree = parametrized_tableau([p], "x")
        assert tree.leaf_at({"a": -2, "b": 1}).conditions[0] == (a, -1)
        assert tree.leaf_at({"a": OvfElem.t(), "b": 1}).conditions[0] == (a, 1)
        zero = tree.leaf_at({"a": 0, "b": 1})
        assert zero.conditions[0] == (a, 0)
