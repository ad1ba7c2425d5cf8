"""
Seeded randomized cross-checks between the layers of the kernel.

Each check runs a small sample in the unit suite and the full sample under
the slow marker. Inputs are drawn from random.Random(RCVF_SEED), so every run
sees the same polynomials and formulas.
"""

import random
from collections.abc import Sequence
from math import lcm

import pytest

import constants
from cli.oracle import check_valuation_of_root, check_vsc, random_kpoly
from qe.case_tree import CaseLeaf, parametrized_tableau
from qe.elimination import decide, eliminate_all
from qe.formula import constant_term, evaluate_ground, free_symbols, instantiate_poly, substitute
from qe.line_set import decompose_line_set, holds_at, partition_line
from qe.parser import parse_formula, parse_polynomials, to_kpoly
from rcvf.line_decomposition import lift_scale, sample_point
from rcvf.newton import root_valuations
from rcvf.ovf_core import GammaVal, OvfElem, ovf_sign, ovf_val
from rcvf.qlterm import QlTerm
from rcvf.rcvf_algorithms import rcvf1_valuation, rcvf2_tableau
from rcvf.tableau import tableau_of

T = OvfElem.t()
INSTANCES = [
    OvfElem.of(0),
    OvfElem.of(1),
    OvfElem.of(-1),
    T,
    -T,
    1 / T,
    -1 / T,
    1 + T,
    -(1 + T),
    T * T,
    -(T * T),
]

PARAM_COEFFS = ["1", "-1", "2", "t", "a", "-a", "a + 1", "a - t", "t*a", "a^2 - 1"]

QE_ATOMS = [
    "x^2 - a = 0",
    "x - a > 0",
    "a*x - 1 >= 0",
    "x <<= a",
    "t <<= x",
    "x^2 + x - a > 0",
    "a <<= x^2",
    "a*x - t = 0",
    "x - t*a < 0",
    "x^3 - a = 0",
]

NESTED_ATOMS = ["x - y > 0", "x^2 - y = 0", "y - a = 0", "y <<= a", "x*y - 1 = 0", "t <<= y", "x - b < 0"]

LINE_ATOMS = [
    "x - t > 0",
    "x + 1 >= 0",
    "t*x - 1 < 0",
    "x - 1 = 0",
    "x + t^2 > 0",
    "x > 0",
    "t <<= x",
    "x - 1 <<= t",
    "x <<= t^2",
    "x + 1 <<= x",
    "1 <<= x",
]


def seeded(salt: int) -> random.Random:
    return random.Random(constants.RCVF_SEED + salt)


def param_poly_text(rng: random.Random, max_degree: int) -> str:
    degree = rng.randint(1, max_degree)
    terms = []
    for k in range(degree + 1):
        if k < degree and rng.random() < 0.3:
            continue
        c = rng.choice(PARAM_COEFFS)
        terms.append(f"({c})" if k == 0 else f"({c})*x" if k == 1 else f"({c})*x^{k}")
    return " + ".join(terms)


def random_body(rng: random.Random, pool: Sequence[str], size: int) -> str:
    parts = []
    for atom in rng.sample(list(pool), size):
        parts.append(f"~({atom})" if rng.random() < 0.25 else f"({atom})")
    return rng.choice([" /\\ ", " \\/ "]).join(parts)


def input_view(point_signs, interval_signs, rows: Sequence[int]):
    """Points where some row vanishes, with the rows' signs there and in between."""
    n = len(point_signs[0]) if point_signs else 0
    points = [k for k in range(n) if any(point_signs[j][k] == 0 for j in rows)]
    firsts = [0, *(k + 1 for k in points)]
    return (
        points,
        [[point_signs[j][k] for k in points] for j in rows],
        [[interval_signs[j][k] for k in firsts] for j in rows],
    )


def ground_value(term: QlTerm, values: dict[str, OvfElem]) -> GammaVal:
    assignment = {
        s.key: ovf_val(constant_term(instantiate_poly(s.key, values))) for s in term.symbols()
    }
    return term.evaluate(assignment)


def as_of_scale(value: OvfElem, q: int, scale: int) -> OvfElem:
    return lift_scale(value, scale // q)


def check_root_valuations_of(count: int, max_degree: int, with_oracle: bool) -> None:
    rng = seeded(3)
    for _ in range(count):
        p = random_kpoly(rng, max_degree=max_degree)
        expected = root_valuations(p)
        monic = p.monic()
        for code in tableau_of([p]).roots:
            if code.poly != monic:
                continue
            assert rcvf1_valuation(code).value in expected, f"{code} of {p}"
            if with_oracle:
                assert check_valuation_of_root(code).passed, f"{code} of {p}"


def check_tableaux_against_oracle(count: int, max_members: int, max_degree: int) -> None:
    rng = seeded(4)
    for _ in range(count):
        family = [random_kpoly(rng, max_degree=max_degree) for _ in range(rng.randint(1, max_members))]
        report = check_vsc(rcvf2_tableau(family))
        assert report.passed, [c.quantity for c in report.failures]


def check_leaves_against_ground(count: int, max_members: int, max_degree: int) -> None:
    rng = seeded(5)
    for _ in range(count):
        texts = [param_poly_text(rng, max_degree) for _ in range(rng.randint(1, max_members))]
        _, polys = parse_polynomials(texts)
        tree = parametrized_tableau(polys, "x")
        for value in INSTANCES:
            values = {"a": value}
            leaf = tree.leaf_at(values)
            assert isinstance(leaf, CaseLeaf), (texts, str(value))
            ground = [to_kpoly(instantiate_poly(p, values), "x") for p in polys]
            vsc = rcvf2_tableau(ground)
            ground_inputs = vsc.base.family.inputs
            positions = sorted(ground_inputs)
            for pos in range(len(polys)):
                assert (leaf.member_of_input(pos) is None) == (pos not in ground_inputs)
            if not positions:
                continue
            leaf_rows = [leaf.member_of_input(pos) for pos in positions]
            ground_rows = [ground_inputs[pos] for pos in positions]
            leaf_points, *leaf_signs = input_view(
                leaf.matrix.point_signs, leaf.matrix.interval_signs, leaf_rows
            )
            ground_points, *ground_signs = input_view(
                vsc.base.point_signs, vsc.base.interval_signs, ground_rows
            )
            assert leaf_signs == ground_signs, (texts, str(value))
            for j, gj in zip(leaf_rows, ground_rows):
                for lk, gk in zip(leaf_points, ground_points):
                    term = leaf.replay.value(j, leaf.matrix.order[lk])
                    assert ground_value(term, values) == vsc.root_vals[gj][gk], (texts, str(value))


def check_elimination_against_decide(formulas: Sequence[str], instances: Sequence[OvfElem]) -> None:
    for text in formulas:
        phi = parse_formula(text)
        reduced = eliminate_all(phi)
        params = sorted(free_symbols(phi))
        for i, value in enumerate(instances):
            values = {name: instances[(i + 3 * n) % len(instances)] for n, name in enumerate(params)}
            expected = decide(substitute(phi, values))
            assert evaluate_ground(substitute(reduced, values)) == expected, (text, str(value))


def random_qe_formulas(count: int, nested: bool) -> list[str]:
    rng = seeded(6)
    out = []
    while len(out) < count:
        quantifier = rng.choice(["exists", "forall"])
        if nested:
            inner = rng.choice(["exists", "forall"])
            text = f"{quantifier} y. {inner} x. {random_body(rng, NESTED_ATOMS, rng.randint(2, 3))}"
        else:
            text = f"{quantifier} x. {random_body(rng, QE_ATOMS, rng.randint(1, 2))}"
        if free_symbols(parse_formula(text)):
            out.append(text)
    return out


def check_line_decompositions(count: int) -> None:
    rng = seeded(7)
    for _ in range(count):
        phi = parse_formula(random_body(rng, LINE_ATOMS, rng.randint(1, 3)))
        mvsc, pieces = partition_line(phi)
        samples = [sample_point(piece.interval, mvsc.base) for piece in pieces]
        for piece, point in zip(pieces, samples):
            assert holds_at(phi, point) == piece.satisfied, str(piece.interval)
        scale = lcm(*(point.q for point in samples))
        lifted = [as_of_scale(point.value, point.q, scale) for point in samples]
        for left, right in zip(lifted, lifted[1:]):
            assert ovf_sign(right - left) > 0
        line_set = decompose_line_set(phi)
        assert len(set(line_set.points)) == len(line_set.points)
        assert len(line_set.points) + len(line_set.intervals) == sum(p.satisfied for p in pieces)


@pytest.mark.unit
class TestRootValuationConsistency:
    """RCVF1 valuations of coded roots lie among the Newton polygon valuations."""

    def test_small_sample(self):
        check_root_valuations_of(count=25, max_degree=4, with_oracle=False)

    @pytest.mark.slow
    def test_full_sample(self):
        check_root_valuations_of(count=200, max_degree=6, with_oracle=True)


@pytest.mark.unit
class TestTableauOracle:
    """Valued sign tableaux agree with the numeric oracle."""

    def test_small_sample(self):
        check_tableaux_against_oracle(count=6, max_members=2, max_degree=3)

    @pytest.mark.slow
    def test_full_sample(self):
        check_tableaux_against_oracle(count=100, max_members=3, max_degree=4)


@pytest.mark.unit
class TestCaseTreeCoherence:
    """The leaf selected by an instantiation reproduces the ground tableau."""

    def test_small_sample(self):
        check_leaves_against_ground(count=8, max_members=2, max_degree=2)

    @pytest.mark.slow
    def test_full_sample(self):
        check_leaves_against_ground(count=50, max_members=2, max_degree=3)


@pytest.mark.unit
class TestEliminationSoundness:
    """Ground evaluation of the eliminated formula agrees with decide."""

    def test_small_sample(self):
        check_elimination_against_decide(random_qe_formulas(3, nested=False), INSTANCES[:5])

    @pytest.mark.slow
    def test_full_sample(self):
        check_elimination_against_decide(random_qe_formulas(80, nested=False), INSTANCES)

    @pytest.mark.slow
    def test_nested_quantifiers(self):
        check_elimination_against_decide(random_qe_formulas(20, nested=True), INSTANCES)


@pytest.mark.unit
class TestLineDecomposition:
    """Random one-variable descriptions split into ordered, correctly labelled pieces."""

    def test_small_sample(self):
        check_line_decompositions(count=10)

    @pytest.mark.slow
    def test_full_sample(self):
        check_line_decompositions(count=50)
