"""
Definable subsets of the valued real line.

A quantifier-free formula in one variable is read against the M-complete
tableau of its polynomials: every point and every (<,⪯)-interval piece of
the line gets a truth value, and the pieces where it holds make up the set.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from sympy.polys.rings import PolyElement

from qe.formula import (
    Atom,
    Bool,
    Formula,
    Rel,
    atom_polys,
    atoms,
    evaluate_ground,
    free_symbols,
    is_quantifier_free,
    map_atoms,
)
from qe.parser import to_kpoly
from rcvf.errors import InconsistentInput, UnboundSymbol
from rcvf.line_decomposition import (
    Form,
    LineInterval,
    LineKind,
    MVscTableau,
    Piece,
    SamplePoint,
    Side,
    lift_scale,
    rcvf3_tableau,
)
from rcvf.ovf_core import GammaVal, KPoly, OvfElem, Sign, ovf_sign, ovf_val
from rcvf.tableau import ThomCode, close_family
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LinePiece:
    interval: LineInterval
    satisfied: bool


@dataclass(frozen=True)
class LineSet:
    points: tuple[ThomCode, ...]
    intervals: tuple[LineInterval, ...]
    partition: tuple[LinePiece, ...]


def _description_data(phi: Formula, variable: str) -> tuple[list[KPoly], list[Atom]]:
    if not is_quantifier_free(phi):
        raise InconsistentInput("line descriptions must be quantifier-free")
    extra = free_symbols(phi) - {variable}
    if extra:
        raise UnboundSymbol(f"line description may only use {variable}, found {sorted(extra)}")
    polys = [KPoly.x()]
    for a in atoms(phi):
        for p in atom_polys(a):
            kp = to_kpoly(p, variable)
            if not kp.is_zero and kp not in polys:
                polys.append(kp)
    return polys, list(dict.fromkeys(atoms(phi)))


def _side_pieces(
    side: Side,
    kind: LineKind,
    anchors: tuple[ThomCode, ThomCode | None],
    positions: tuple[int, int | None],
    reverse: bool,
) -> list[tuple[LineInterval, Piece]]:
    a, b = anchors
    out = [
        (
            LineInterval(
                kind=kind,
                a=a,
                b=b,
                low=piece.low,
                high=piece.high,
                a_position=positions[0],
                b_position=positions[1],
            ),
            piece,
        )
        for piece in side.pieces
    ]
    return out[::-1] if reverse else out


def partition_line(phi: Formula, variable: str = "x") -> tuple[MVscTableau, list[LinePiece]]:
    """Every piece of the line, left to right, with the truth value of phi on it."""
    polys, atom_list = _description_data(phi, variable)
    family = close_family(polys)

    def member(p: PolyElement) -> int | None:
        kp = to_kpoly(p, variable)
        return None if kp.is_zero else family.index(kp)

    forms: list[Form] = []
    form_of: dict[Atom, int] = {}
    for a in atom_list:
        if a.rel is not Rel.DIV:
            continue
        lhs, rhs = member(a.lhs), member(a.rhs)
        if lhs is None or rhs is None:
            continue
        vec = [0] * len(family.polys)
        vec[lhs] += 1
        vec[rhs] -= 1
        form_of[a] = len(forms)
        forms.append(tuple(vec))

    mvsc = rcvf3_tableau(polys, forms)
    vsc = mvsc.base
    roots = vsc.base.roots
    n = len(roots)

    def truth(
        signs: Sequence[Sign],
        values: Sequence[GammaVal] | None,
        form_signs: Sequence[Sign | None],
    ) -> bool:
        def atom_value(a: Atom) -> Formula:
            lhs = member(a.lhs)
            if a.rel is Rel.DIV:
                rhs = member(a.rhs)
                if rhs is None:
                    return Bool(True)
                if lhs is None:
                    return Bool(False)
                s = form_signs[form_of[a]]
                if s is not None:
                    return Bool(s <= 0)
                assert values is not None
                return Bool(values[lhs] <= values[rhs])
            s = 0 if lhs is None else signs[lhs]
            if a.rel is Rel.EQ:
                return Bool(s == 0)
            if a.rel is Rel.GT:
                return Bool(s > 0)
            return Bool(s >= 0)

        return evaluate_ground(map_atoms(phi, atom_value))

    pieces: list[LinePiece] = []
    for part in mvsc.intervals:
        k = part.index
        signs = [row[k] for row in vsc.base.interval_signs]
        if k == 0:
            found = _side_pieces(part.sides[0], LineKind.IMINUS, (roots[0], None), (0, None), False)
        elif k == n:
            found = _side_pieces(
                part.sides[0], LineKind.IPLUS, (roots[n - 1], None), (n - 1, None), True
            )
        else:
            anchors = (roots[k - 1], roots[k])
            found = _side_pieces(part.sides[0], LineKind.JPLUS, anchors, (k - 1, k), True)
            assert part.middle is not None
            middle = LineInterval(LineKind.JMID, *anchors, a_position=k - 1, b_position=k)
            found.append((middle, Piece(Fraction(0), Fraction(0), part.middle)))
            found += _side_pieces(part.sides[1], LineKind.JMINUS, anchors, (k - 1, k), False)
        pieces += [LinePiece(i, truth(signs, None, p.form_signs)) for i, p in found]
        if k < n:
            signs_at = [row[k] for row in vsc.base.point_signs]
            values = [row[k] for row in vsc.root_vals]
            point = LineInterval(LineKind.POINT, roots[k], a_position=k)
            pieces.append(LinePiece(point, truth(signs_at, values, mvsc.point_form_signs[k])))
    return mvsc, pieces


def decompose_line_set(phi: Formula, variable: str = "x") -> LineSet:
    """Disjoint points and (<,⪯)-intervals whose union is the set defined by phi."""
    _, pieces = partition_line(phi, variable)
    chosen = [p for p in pieces if p.satisfied]
    points = tuple(p.interval.a for p in chosen if p.interval.kind is LineKind.POINT)
    intervals = tuple(p.interval for p in chosen if p.interval.kind is not LineKind.POINT)
    logger.debug("Line set decomposed", pieces=len(pieces), chosen=len(chosen))
    return LineSet(points=points, intervals=intervals, partition=tuple(pieces))


def holds_at(phi: Formula, point: SamplePoint, variable: str = "x") -> bool:
    """Truth of a one-variable description at a sample point."""

    def value(p: object) -> OvfElem:
        kp = to_kpoly(p, variable)  # type: ignore[arg-type]
        lifted = KPoly.of([lift_scale(c, point.q) for c in kp.coeffs])
        return lifted.evaluate(point.value)

    def atom_value(a: Atom) -> Formula:
        lhs = value(a.lhs)
        if a.rel is Rel.DIV:
            return Bool(ovf_val(lhs) <= ovf_val(value(a.rhs)))
        s = ovf_sign(lhs)
        if a.rel is Rel.EQ:
            return Bool(s == 0)
        if a.rel is Rel.GT:
            return Bool(s > 0)
        return Bool(s >= 0)

    return evaluate_ground(map_atoms(phi, atom_value))
