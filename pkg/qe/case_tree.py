"""
Parametrized complete tableaux.

The coefficients of the polynomials in X are polynomials in parameters. The
Cohen-Hörmander induction and the valuation replay run unchanged on the
family shape; only the sign of a parameter polynomial is unknown, and every
such question opens three branches (-, 0, +). Remainders are replaced by
pseudo-remainders scaled by an even power of the leading coefficient, so no
division by a parameter polynomial ever happens.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

from sympy.polys.rings import PolyElement, PolyRing

import constants
from qe.formula import coefficients_in, constant_term, format_poly, instantiate_poly, symbol_names
from rcvf.errors import BranchLimitExceeded
from rcvf.ovf_core import OvfElem, Sign, ovf_sign, ovf_val
from rcvf.qlterm import QlTerm, ValOf, const
from rcvf.rcvf_algorithms import ValuationReplay
from rcvf.tableau import FamilyShape, Provenance, RemainderLink, SignMatrix, cohen_hormander
from utils.logger import get_logger, log_case_split

logger = get_logger(__name__)


class NeedSign(Exception):
    """Raised by the sign oracle when a branch has to be opened."""

    def __init__(self, poly: PolyElement):
        super().__init__(format_poly(poly))
        self.poly = poly


def normalize(c: PolyElement) -> tuple[Any, PolyElement]:
    """Split c = g * key with g in K and key monic."""
    g = c.LC
    return g, c.monic()


@dataclass
class Assumptions:
    """Signs of monic parameter polynomials assumed on a branch."""

    signs: dict[PolyElement, Sign] = field(default_factory=dict)

    def sign(self, c: PolyElement) -> Sign:
        if not c:
            return 0
        if c.is_ground:
            return ovf_sign(constant_term(c))
        g, key = normalize(c)
        s = self.signs.get(key)
        if s is None:
            for z, zs in self.signs.items():
                if zs == 0 and not key.rem(z):
                    return 0
            raise NeedSign(key)
        return ovf_sign(constant_term(c.ring(g))) * s

    def valuation(self, c: PolyElement) -> QlTerm:
        """v(c) for a parameter polynomial nonzero on this branch."""
        if c.is_ground:
            return const(ovf_val(constant_term(c)))
        g, key = normalize(c)
        return const(ovf_val(constant_term(c.ring(g)))) + ValOf(key, format_poly(key))


@dataclass(frozen=True)
class PPoly:
    """Polynomial in the main variable with parameter-polynomial coefficients."""

    coeffs: tuple[PolyElement, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(self.coeffs)
        while coeffs and not coeffs[-1]:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> PolyElement:
        return self.coeffs[-1]

    def derivative(self) -> PPoly:
        return PPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def settle(self, oracle: Assumptions) -> PPoly:
        """Drop leading coefficients that vanish on the branch."""
        coeffs = list(self.coeffs)
        while coeffs and oracle.sign(coeffs[-1]) == 0:
            coeffs.pop()
        return PPoly(tuple(coeffs))

    def pseudo_rem(self, q: PPoly) -> tuple[PPoly, int]:
        """(prem, e) with lc(q)^e * self = S * q + prem and e even."""
        m = q.degree
        lead = q.lc
        r = list(self.coeffs)
        steps = 0
        for k in range(self.degree, m - 1, -1):
            top = r[k] if k < len(r) else lead.ring.zero
            r = [lead * c for c in r]
            for i, qc in enumerate(q.coeffs):
                r[k - m + i] = r[k - m + i] - top * qc
            steps += 1
        e = steps if steps % 2 == 0 else steps + 1
        if e != steps:
            r = [lead * c for c in r]
        return PPoly(tuple(r[:m])), e

    def compose_param(self, gen: PolyElement, replacement: PolyElement) -> PPoly:
        return PPoly(tuple(c.compose(gen, replacement) for c in self.coeffs))

    def render(self, variable: str) -> str:
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else (variable if k == 1 else f"{variable}^{k}")
            body = format_poly(c)
            if mono:
                body = mono if body == "1" else f"({body})*{mono}"
            parts.append(body)
        return " + ".join(parts) or "0"


def ppoly_of(p: PolyElement, variable: str) -> PPoly:
    if variable not in [str(s) for s in p.ring.symbols]:
        return PPoly((p,))
    return PPoly(tuple(coefficients_in(p, variable)))


@dataclass(frozen=True)
class ParamFamily:
    polys: tuple[PPoly, ...]
    provenance: tuple[Provenance, ...]
    derivative: tuple[int | None, ...]
    remainders: dict[tuple[int, int], RemainderLink] = field(hash=False)
    inputs: tuple[int | None, ...]

    def shape(self, oracle: Assumptions) -> FamilyShape:
        return FamilyShape(
            degrees=tuple(p.degree for p in self.polys),
            derivative=self.derivative,
            remainders=self.remainders,
            lead_signs=tuple(oracle.sign(p.lc) for p in self.polys),
        )


def close_param_family(inputs: Sequence[PPoly], oracle: Assumptions) -> ParamFamily:
    """Close under derivation and pseudo-remainder, settling degrees on the branch."""
    members: list[PPoly] = []
    provenance: list[Provenance] = []
    found: dict[PPoly, int] = {}
    deriv: dict[int, int | None] = {}
    rems: dict[tuple[int, int], RemainderLink] = {}

    def add(p: PPoly, prov: Provenance) -> int | None:
        p = p.settle(oracle)
        if p.is_zero:
            return None
        if p in found:
            return found[p]
        found[p] = len(members)
        members.append(p)
        provenance.append(prov)
        return found[p]

    input_members = [add(p, ("input", pos)) for pos, p in enumerate(inputs)]

    cursor = 0
    while cursor < len(members):
        p = members[cursor]
        deriv[cursor] = add(p.derivative(), ("derivative", cursor)) if p.degree >= 1 else None
        for other in range(cursor + 1):
            for i, j in ((cursor, other), (other, cursor)):
                if i == j or (i, j) in rems:
                    continue
                pi, pj = members[i], members[j]
                if pi.degree >= pj.degree >= 1:
                    r, e = pi.pseudo_rem(pj)
                    rems[(i, j)] = RemainderLink(add(r, ("remainder", i, j)), e)
        cursor += 1

    perm = sorted(range(len(members)), key=lambda i: (members[i].degree, i))
    new_index = {old: new for new, old in enumerate(perm)}

    def remap(i: int | None) -> int | None:
        return None if i is None else new_index[i]

    def remap_prov(prov: Provenance) -> Provenance:
        if prov[0] == "input":
            return prov
        if prov[0] == "derivative":
            return ("derivative", new_index[prov[1]])
        return ("remainder", new_index[prov[1]], new_index[prov[2]])

    return ParamFamily(
        polys=tuple(members[i] for i in perm),
        provenance=tuple(remap_prov(provenance[i]) for i in perm),
        derivative=tuple(remap(deriv[i]) for i in perm),
        remainders={
            (new_index[i], new_index[j]): RemainderLink(remap(link.target), link.shift)
            for (i, j), link in rems.items()
        },
        inputs=tuple(remap(i) for i in input_members),
    )


# Case trees


Condition = tuple[PolyElement, Sign]


@dataclass(frozen=True)
class CaseLeaf:
    """Complete tableau of one branch with valuations as Q-semilinear terms."""

    conditions: tuple[Condition, ...]
    family: ParamFamily
    matrix: SignMatrix
    replay: ValuationReplay = field(compare=False, repr=False)

    def member_of_input(self, pos: int) -> int | None:
        return self.family.inputs[pos]


@dataclass(frozen=True)
class CaseBranch:
    query: PolyElement
    children: tuple[tuple[Sign, CaseNode], ...]


CaseNode = Union[CaseLeaf, CaseBranch]


@dataclass(frozen=True)
class CaseTree:
    root: CaseNode | None
    variable: str
    inputs: tuple[PPoly, ...]

    def leaves(self) -> Iterator[CaseLeaf]:
        stack = [self.root] if self.root is not None else []
        while stack:
            node = stack.pop(0)
            if isinstance(node, CaseLeaf):
                yield node
            else:
                stack[:0] = [child for _, child in node.children]

    @property
    def leaf_count(self) -> int:
        return sum(1 for _ in self.leaves())

    def leaf_at(self, values: Mapping[str, OvfElem | int | Fraction]) -> CaseLeaf | None:
        """Leaf whose sign conditions hold once the parameters take `values`."""
        node = self.root
        while isinstance(node, CaseBranch):
            s = ovf_sign(constant_term(instantiate_poly(node.query, values)))
            node = dict(node.children).get(s)
        return node

    def to_json(self) -> dict[str, Any]:
        return {
            "variable": self.variable,
            "inputs": [p.render(self.variable) for p in self.inputs],
            "root": None if self.root is None else _node_json(self.root, self.variable),
        }


def _node_json(node: CaseNode, variable: str) -> dict[str, Any]:
    if isinstance(node, CaseBranch):
        marks = {-1: "-", 0: "0", 1: "+"}
        return {
            "query": format_poly(node.query),
            "children": {marks[s]: _node_json(child, variable) for s, child in node.children},
        }
    replay = node.replay
    order = node.matrix.order
    return {
        "conditions": [[format_poly(c), s] for c, s in node.conditions],
        "members": [p.render(variable) for p in node.family.polys],
        "point_signs": [list(row) for row in node.matrix.point_signs],
        "interval_signs": [list(row) for row in node.matrix.interval_signs],
        "root_vals": [
            [str(replay.value(j, pid)) for pid in order] for j in range(len(node.family.polys))
        ],
        "gap_vals": [str(g) for g in replay.final_gaps()],
    }


@dataclass
class _Branch:
    inputs: tuple[PPoly, ...]
    oracle: Assumptions
    conditions: tuple[Condition, ...] = ()

    def assume(self, key: PolyElement, sign: Sign) -> _Branch | None:
        """Child branch with sign(key) = sign; None when it contradicts the branch."""
        conditions = (*self.conditions, (key, sign))
        if sign != 0:
            signs = dict(self.oracle.signs)
            signs[key] = sign
            return _Branch(self.inputs, Assumptions(signs), conditions)
        substitution = _linear_substitution(key)
        if substitution is None:
            signs = dict(self.oracle.signs)
            signs[key] = 0
            return _Branch(self.inputs, Assumptions(signs), conditions)
        gen, replacement = substitution
        inputs = tuple(p.compose_param(gen, replacement) for p in self.inputs)
        signs: dict[PolyElement, Sign] = {}
        for c, s in self.oracle.signs.items():
            c = c.compose(gen, replacement)
            if not c or c.is_ground:
                actual = 0 if not c else ovf_sign(constant_term(c))
                if actual != s:
                    return None
                continue
            g, k = normalize(c)
            s = s * ovf_sign(constant_term(c.ring(g)))
            if signs.get(k, s) != s:
                return None
            signs[k] = s
        return _Branch(inputs, Assumptions(signs), conditions)


def _linear_substitution(key: PolyElement) -> tuple[PolyElement, PolyElement] | None:
    """gen -> replacement solving key = 0 for a parameter occurring linearly with constant coefficient."""
    r: PolyRing = key.ring
    for name in sorted(symbol_names(key)):
        coeffs = coefficients_in(key, name)
        if len(coeffs) == 2 and coeffs[1].is_ground:
            gen = r.gens[[str(s) for s in r.symbols].index(name)]
            lead = coeffs[1].get(r.zero_monom, r.domain.zero)
            return gen, -coeffs[0].quo_ground(lead)
    return None


def _build_leaf(branch: _Branch) -> CaseLeaf:
    oracle = branch.oracle
    family = close_param_family(branch.inputs, oracle)
    shape = family.shape(oracle)
    matrix = cohen_hormander(shape)
    const_vals = {
        j: oracle.valuation(p.coeffs[0]) for j, p in enumerate(family.polys) if p.degree <= 0
    }
    shift_vals = {
        j: oracle.valuation(p.lc) for j, p in enumerate(family.polys) if p.degree >= 1
    }
    replay = ValuationReplay(shape, matrix, const_vals, shift_vals)
    return CaseLeaf(conditions=branch.conditions, family=family, matrix=matrix, replay=replay)


def parametrized_tableau(
    polys: Sequence[PolyElement],
    variable: str,
    assumptions: Mapping[PolyElement, Sign] | None = None,
    max_branches: int | None = None,
) -> CaseTree:
    """Case tree of complete tableaux for polynomials in `variable` over the other symbols."""
    limit = constants.MAX_BRANCHES if max_branches is None else max_branches
    inputs = tuple(ppoly_of(p, variable) for p in polys)
    signs: dict[PolyElement, Sign] = {}
    for c, s in (assumptions or {}).items():
        g, key = normalize(c)
        signs[key] = s * ovf_sign(constant_term(c.ring(g)))
    leaves = 0

    def explore(branch: _Branch, depth: int) -> CaseNode | None:
        nonlocal leaves
        try:
            leaf = _build_leaf(branch)
        except NeedSign as need:
            log_case_split(logger, format_poly(need.poly), depth, leaves)
            children = []
            for s in (-1, 0, 1):
                child = branch.assume(need.poly, s)
                if child is None:
                    continue
                node = explore(child, depth + 1)
                if node is not None:
                    children.append((s, node))
            return CaseBranch(need.poly, tuple(children)) if children else None
        leaves += 1
        if leaves > limit:
            raise BranchLimitExceeded(f"case tree exceeds {limit} leaves")
        return leaf

    root = explore(_Branch(inputs, Assumptions(signs)), 0)
    logger.debug("Case tree built", inputs=len(inputs), leaves=leaves)
    return CaseTree(root=root, variable=variable, inputs=inputs)
