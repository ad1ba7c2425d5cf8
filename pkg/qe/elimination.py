"""
Quantifier elimination for real closed valued fields.

An innermost existential is eliminated by building the case tree of the
polynomials of its matrix and asking, on every leaf, whether a point or an
open interval of the leaf tableau satisfies the matrix. On points the
answer is a condition on the valuations of the parameters. On intervals the
valuations are piecewise affine in a local scale tau, which is removed by
Fourier-Motzkin elimination over the divisible value group. Remaining
linear conditions on valuations become divisibility atoms between
monomials in the parameter polynomials.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from fractions import Fraction
from math import lcm

from sympy.polys.rings import PolyElement, PolyRing

from qe.case_tree import CaseLeaf, parametrized_tableau
from qe.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Bool,
    Exists,
    Forall,
    Formula,
    Implies,
    Literal,
    Not,
    Or,
    Rel,
    ValLe,
    atom_polys,
    atoms,
    dnf_clauses,
    evaluate_ground,
    free_symbols,
    is_quantifier_free,
    map_atoms,
    monomial_atom,
    sign_atom,
    simplify,
    symbol_names,
)
from rcvf.errors import NotInnermostExists, UnboundSymbol
from rcvf.ovf_core import T, Sign
from rcvf.qlterm import INF_TERM, ZERO_TERM, Const, Lin, Max, Min, QlTerm, ValOf, tmax, tmin
from rcvf.rcvf_algorithms import LocalVariable
from utils.logger import get_logger, log_stage_completion, log_stage_start

logger = get_logger(__name__)

TAU = ValOf("__tau__", "tau")


# Valuation comparisons


def lift_minmax(term: QlTerm) -> QlTerm:
    """Rewrite a term so that min and max only occur above linear leaves."""
    if isinstance(term, (Min, Max)):
        kind = tmin if isinstance(term, Min) else tmax
        return kind(*(lift_minmax(a) for a in term.args))
    if not isinstance(term, Lin):
        return term
    for sub, coeff in term.terms:
        if isinstance(sub, (Min, Max)):
            rest = term - sub * coeff
            flips = coeff < 0
            use_min = isinstance(sub, Min) != flips
            kind = tmin if use_min else tmax
            return kind(*(lift_minmax(a * coeff + rest) for a in sub.args))
    return term


def _linear(term: QlTerm) -> tuple[dict[ValOf, Fraction], Fraction]:
    if isinstance(term, Const):
        return {}, term.value.finite
    if isinstance(term, ValOf):
        return {term: Fraction(1)}, Fraction(0)
    assert isinstance(term, Lin)
    out: dict[ValOf, Fraction] = {}
    for sub, coeff in term.terms:
        assert isinstance(sub, ValOf), f"unexpected subterm {sub}"
        out[sub] = out.get(sub, Fraction(0)) + coeff
    return out, term.const


def ql_le(a: QlTerm, b: QlTerm) -> Formula:
    """Formula over linear valuation constraints equivalent to a <= b."""
    if b.is_inf:
        return TRUE
    if a.is_inf:
        return FALSE
    a, b = lift_minmax(a), lift_minmax(b)
    if isinstance(b, Min):
        return And(tuple(ql_le(a, arg) for arg in b.args))
    if isinstance(b, Max):
        return Or(tuple(ql_le(a, arg) for arg in b.args))
    if isinstance(a, Min):
        return Or(tuple(ql_le(arg, b) for arg in a.args))
    if isinstance(a, Max):
        return And(tuple(ql_le(arg, b) for arg in a.args))
    terms, constant = _linear(a - b)
    return ValLe.of(terms, constant)


def _fourier_motzkin(clause: Sequence[Literal], bounded_below: bool) -> list[Literal]:
    """Remove tau from a conjunction; tau > 0 is added when bounded_below."""
    keep: list[Literal] = []
    lower: list[tuple[dict[ValOf, Fraction], Fraction, bool]] = []
    upper: list[tuple[dict[ValOf, Fraction], Fraction, bool]] = []
    constraints = list(clause)
    if bounded_below:
        constraints.append(ValLe.of({TAU: Fraction(-1)}, Fraction(0), strict=True))
    for lit in constraints:
        if not isinstance(lit, ValLe):
            keep.append(lit)
            continue
        c = lit.coefficient(TAU.key)
        if not c:
            keep.append(lit)
            continue
        rest = {k: v / abs(c) for k, v in lit.terms if k != TAU}
        bound = (rest, lit.const / abs(c), lit.strict)
        # c > 0: tau + rest <= 0 is an upper bound; c < 0: rest <= tau is a lower bound
        (upper if c > 0 else lower).append(bound)
    for lo_terms, lo_const, lo_strict in lower:
        for up_terms, up_const, up_strict in upper:
            # lower says lo <= tau, upper says tau <= -up: need lo + up <= 0
            merged = dict(lo_terms)
            for k, v in up_terms.items():
                merged[k] = merged.get(k, Fraction(0)) + v
            keep.append(ValLe.of(merged, lo_const + up_const, lo_strict or up_strict))
    return keep


def valuation_atoms(constraint: ValLe, r: PolyRing) -> Formula:
    """Divisibility atom between monomials equivalent to the constraint."""
    denominators = [c.denominator for _, c in constraint.terms] + [constraint.const.denominator]
    scale = lcm(*denominators)
    lhs: list[tuple[PolyElement, int]] = []
    rhs: list[tuple[PolyElement, int]] = []
    for key, c in constraint.terms:
        n = int(c * scale)
        (lhs if n > 0 else rhs).append((key.key, abs(n)))
    n0 = int(constraint.const * scale)
    if n0:
        (lhs if n0 > 0 else rhs).append((r(T), abs(n0)))
    if constraint.strict:
        return Not(monomial_atom(rhs, lhs, r))
    return monomial_atom(lhs, rhs, r)


def _realize(phi: Formula, r: PolyRing) -> Formula:
    if isinstance(phi, ValLe):
        return valuation_atoms(phi, r) if phi.terms else Bool(evaluate_ground(phi))
    if isinstance(phi, Not):
        return Not(_realize(phi.arg, r))
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(_realize(a, r) for a in phi.args))
    return phi


# Elimination of one variable


class _LeafReader:
    """Truth of the matrix on the points and intervals of one leaf."""

    def __init__(self, leaf: CaseLeaf, x_atoms: dict[Atom, list[int]], ring: PolyRing):
        self.leaf = leaf
        self.x_atoms = x_atoms
        self.ring = ring
        self.order = leaf.matrix.order
        self.gaps = leaf.replay.final_gaps() if self.order else []

    def _member(self, pos: int) -> int | None:
        return self.leaf.member_of_input(pos)

    def _eval(self, atom: Atom, sign_of: object, value_of: object) -> Formula:
        positions = self.x_atoms.get(atom)
        if positions is None:
            return atom
        members = [self._member(p) for p in positions]
        if atom.rel is Rel.DIV:
            return ql_le(value_of(members[0]), value_of(members[1]))  # type: ignore[operator]
        s = sign_of(members[0])  # type: ignore[operator]
        if atom.rel is Rel.EQ:
            return Bool(s == 0)
        if atom.rel is Rel.GT:
            return Bool(s > 0)
        return Bool(s >= 0)

    def at_point(self, body: Formula, k: int) -> Formula:
        pid = self.order[k]
        matrix, replay = self.leaf.matrix, self.leaf.replay

        def sign_of(j: int | None) -> Sign:
            return 0 if j is None else matrix.point_signs[j][k]

        def value_of(j: int | None) -> QlTerm:
            return INF_TERM if j is None else replay.value(j, pid)

        return map_atoms(body, lambda a: self._eval(a, sign_of, value_of))

    def on_interval(self, body: Formula, k: int) -> Formula:
        matrix, replay = self.leaf.matrix, self.leaf.replay
        n = len(self.order)
        left = self.order[k - 1] if k > 0 else None
        right = self.order[k] if k < n else None
        delta = self.gaps[k - 1] if 0 < k < n else None

        def sign_of(j: int | None) -> Sign:
            return 0 if j is None else matrix.interval_signs[j][k]

        def region(variable: LocalVariable | None) -> Formula:
            def value_of(j: int | None) -> QlTerm:
                if j is None:
                    return INF_TERM
                if replay.shape.degrees[j] <= 0:
                    return replay.const_vals[j]
                plv = replay.member_plv(j, left, right, delta)
                if variable is None:
                    return tmin(*(o for o, _ in plv.pieces))
                return tmin(*(o + (TAU * s if s else ZERO_TERM) for o, s in plv.on_side(variable)))

            return map_atoms(body, lambda a: self._eval(a, sign_of, value_of))

        if not self.order:
            return self._eliminate_tau(region(None), None)
        if left is not None and right is not None:
            return Or(
                (
                    self._eliminate_tau(region(LocalVariable.TAU1), True),
                    self._eliminate_tau(region(None), None),
                    self._eliminate_tau(region(LocalVariable.TAU2), True),
                )
            )
        return self._eliminate_tau(region(LocalVariable.TAU), False)

    def _eliminate_tau(self, phi: Formula, bounded_below: bool | None) -> Formula:
        if bounded_below is None:
            return _realize(simplify(phi), self.ring)
        clauses = dnf_clauses(phi)
        out = []
        for clause in clauses:
            reduced = _fourier_motzkin(clause, bounded_below)
            out.append(_realize(simplify(And(tuple(reduced))), self.ring))
        return Or(tuple(out))

    def formula(self, body: Formula) -> Formula:
        parts: list[Formula] = [self.at_point(body, k) for k in range(len(self.order))]
        parts = [_realize(simplify(p), self.ring) for p in parts]
        parts += [self.on_interval(body, k) for k in range(len(self.order) + 1)]
        condition = And(tuple(sign_atom(c, s) for c, s in self.leaf.conditions))
        return simplify(And((condition, Or(tuple(parts)))))


def eliminate_one(phi: Formula, max_branches: int | None = None) -> Formula:
    """Quantifier-free equivalent of an innermost existential."""
    if not isinstance(phi, Exists) or not is_quantifier_free(phi.body):
        raise NotInnermostExists("eliminate_one needs exists x. <quantifier-free matrix>")
    x = phi.var
    body = simplify(phi.body)
    if x not in free_symbols(body):
        return body

    polys: list[PolyElement] = []
    x_atoms: dict[Atom, list[int]] = {}
    for a in atoms(body):
        if x not in set().union(*(symbol_names(p) for p in atom_polys(a))):
            continue
        positions = []
        for p in atom_polys(a):
            if p not in polys:
                polys.append(p)
            positions.append(polys.index(p))
        x_atoms[a] = positions
    ring = polys[0].ring

    tree = parametrized_tableau(polys, x, max_branches=max_branches)
    disjuncts = [_LeafReader(leaf, x_atoms, ring).formula(body) for leaf in tree.leaves()]
    result = simplify(Or(tuple(disjuncts)))
    logger.debug("Eliminated variable", variable=x, leaves=len(disjuncts))
    return result


def eliminate_all(phi: Formula, max_branches: int | None = None) -> Formula:
    """Quantifier-free equivalent of any formula, innermost quantifiers first."""
    if isinstance(phi, Exists):
        body = eliminate_all(phi.body, max_branches)
        return eliminate_one(Exists(phi.var, body), max_branches)
    if isinstance(phi, Forall):
        inner = eliminate_all(Exists(phi.var, Not(phi.body)), max_branches)
        return simplify(Not(inner))
    if isinstance(phi, Not):
        return simplify(Not(eliminate_all(phi.arg, max_branches)))
    if isinstance(phi, (And, Or)):
        return simplify(type(phi)(tuple(eliminate_all(a, max_branches) for a in phi.args)))
    if isinstance(phi, Implies):
        return simplify(
            Implies(eliminate_all(phi.lhs, max_branches), eliminate_all(phi.rhs, max_branches))
        )
    return simplify(phi)


def decide(phi: Formula, max_branches: int | None = None) -> bool:
    """Truth of a closed formula in the real closure of Q(t)."""
    free = free_symbols(phi)
    if free:
        raise UnboundSymbol(f"decide needs a closed formula, free symbols: {sorted(free)}")
    started = time.monotonic()
    log_stage_start(logger, "decide")
    result = evaluate_ground(eliminate_all(phi, max_branches))
    log_stage_completion(logger, "decide", time.monotonic() - started, result=result)
    return result
