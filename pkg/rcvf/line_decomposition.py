"""
M-complete tableaux and the pieces of the valued real line.

On every open interval of a complete tableau each v(F_j(x)) is a min of
affine functions of one local scale (tau1 near the left point, tau2 near the
right point, tau = v(x - anchor) on unbounded intervals). Linear forms in
these valuations are therefore piecewise affine; their sign changes cut each
side into finitely many pieces, and every piece of the line is a point or a
(<,⪯)-interval. Sample points of pieces with anchors in K are exact.
"""

from __future__ import annotations

import enum
import time
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import constants
from rcvf.errors import GuardExceeded, InconsistentInput, UnknownRoot, ZeroValuedTerm
from rcvf.ovf_core import INF, GammaVal, KPoly, OvfElem, Sign
from rcvf.qlterm import ground_value
from rcvf.rcvf_algorithms import LocalVariable, VscTableau, rcvf2_tableau
from rcvf.tableau import ThomCode
from utils.logger import get_logger, log_stage_completion, log_stage_start

logger = get_logger(__name__)

Form = tuple[int, ...]


def m_complete_forms(m: int, bound: int, limit: int | None = None) -> list[Form]:
    """All nonzero integer vectors of length m with entries in [-bound, bound]."""
    limit = constants.M_COMPLETE_LIMIT if limit is None else limit
    if m < 1 or bound < 0:
        raise ValueError(f"invalid M-complete request m={m}, M={bound}")
    size = m * (2 * bound + 1) ** m
    if size > limit:
        raise GuardExceeded(f"M-complete enumeration of size {size} exceeds {limit}")
    values = range(-bound, bound + 1)
    return [v for v in product(values, repeat=m) if any(v)]


def form_value(form: Form, values: Sequence[GammaVal]) -> Fraction:
    """sum l_j v(F_j(x)); raises ZeroValuedTerm when a used member vanishes."""
    total = Fraction(0)
    for coeff, v in zip(form, values):
        if not coeff:
            continue
        if v.is_inf:
            raise ZeroValuedTerm("linear form references a member vanishing here")
        total += coeff * v.finite
    return total


def form_sign(form: Form, values: Sequence[GammaVal]) -> Sign | None:
    try:
        total = form_value(form, values)
    except ZeroValuedTerm:
        return None
    return (total > 0) - (total < 0)


@dataclass(frozen=True)
class Piece:
    """Range of the local scale; low == high for a cut point, None is unbounded."""

    low: Fraction | None
    high: Fraction | None
    form_signs: tuple[Sign | None, ...]

    @property
    def is_cut(self) -> bool:
        return self.low is not None and self.low == self.high

    def sample(self) -> Fraction:
        if self.is_cut:
            assert self.low is not None
            return self.low
        if self.low is None and self.high is None:
            return Fraction(0)
        if self.low is None:
            assert self.high is not None
            return self.high - 1
        if self.high is None:
            return self.low + 1
        return (self.low + self.high) / 2


@dataclass(frozen=True)
class Side:
    """Partition of one local scale, pieces in increasing order of the scale."""

    variable: LocalVariable
    pieces: tuple[Piece, ...]

    @property
    def cuts(self) -> tuple[Fraction, ...]:
        return tuple(p.low for p in self.pieces if p.is_cut)  # type: ignore[misc]


@dataclass(frozen=True)
class IntervalPartition:
    index: int
    sides: tuple[Side, ...]
    middle: tuple[Sign | None, ...] | None = None

    @property
    def cut_count(self) -> int:
        return sum(len(s.cuts) for s in self.sides)


@dataclass(frozen=True)
class MVscTableau:
    base: VscTableau
    forms: tuple[Form, ...]
    point_form_signs: tuple[tuple[Sign | None, ...], ...]
    intervals: tuple[IntervalPartition, ...]


def _member_pieces(vsc: VscTableau, k: int, variable: LocalVariable) -> list[list[tuple[Fraction, int]]]:
    return [
        [(ground_value(o).finite, s) for o, s in row[k].on_side(variable)]
        for row in vsc.intervals
    ]


def _values_at(pieces: list[list[tuple[Fraction, int]]], tau: Fraction) -> list[GammaVal]:
    return [GammaVal(min(o + s * tau for o, s in member)) if member else INF for member in pieces]


def _candidates(
    pieces: list[list[tuple[Fraction, int]]], forms: Sequence[Form], low: Fraction | None
) -> list[Fraction]:
    breaks: set[Fraction] = set()
    for member in pieces:
        for (o1, s1), (o2, s2) in product(member, member):
            if s1 != s2:
                breaks.add((o2 - o1) / (s1 - s2))
    ordered = sorted(b for b in breaks if low is None or b > low)
    bounds: list[Fraction | None] = [low, *ordered, None]
    zeros: set[Fraction] = set()
    for lo, hi in zip(bounds, bounds[1:]):
        p1 = Piece(lo, hi, ()).sample()
        p2 = (p1 + hi) / 2 if hi is not None else p1 + 1
        for form in forms:
            f1 = form_value(form, _values_at(pieces, p1))
            f2 = form_value(form, _values_at(pieces, p2))
            slope = (f2 - f1) / (p2 - p1)
            if slope:
                z = p1 - f1 / slope
                if (lo is None or z > lo) and (hi is None or z < hi):
                    zeros.add(z)
    return sorted(breaks.union(zeros) - ({low} if low is not None else set()))


def _partition_side(
    vsc: VscTableau, k: int, variable: LocalVariable, forms: Sequence[Form], low: Fraction | None
) -> Side:
    pieces = _member_pieces(vsc, k, variable)

    def signs(tau: Fraction) -> tuple[Sign | None, ...]:
        values = _values_at(pieces, tau)
        return tuple(form_sign(f, values) for f in forms)

    if not forms:
        return Side(variable, (Piece(low, None, ()),))
    cuts = [c for c in _candidates(pieces, forms, low) if low is None or c > low]
    out: list[Piece] = []
    start = low
    bounds: list[Fraction | None] = [low, *cuts, None]
    current = signs(Piece(bounds[0], bounds[1], ()).sample())
    for i, c in enumerate(cuts):
        after = signs(Piece(c, bounds[i + 2], ()).sample())
        at = signs(c)
        if at == current == after:
            continue
        out.append(Piece(start, c, current))
        out.append(Piece(c, c, at))
        start, current = c, after
    out.append(Piece(start, None, current))
    return Side(variable, tuple(out))


def rcvf3_tableau(polys: Sequence[KPoly], forms: Sequence[Form]) -> MVscTableau:
    """Complete tableau refined by the sign of every requested linear form."""
    started = time.monotonic()
    log_stage_start(logger, "rcvf3", inputs=len(polys), forms=len(forms))
    vsc = rcvf2_tableau(polys)
    width = len(vsc.polys)
    for form in forms:
        if len(form) != width:
            raise InconsistentInput(f"form {form} needs {width} coefficients, one per family member")
    forms = tuple(tuple(int(c) for c in f) for f in forms)

    points = len(vsc.base.roots)
    point_form_signs = tuple(
        tuple(form_sign(f, [row[k] for row in vsc.root_vals]) for f in forms) for k in range(points)
    )
    partitions = []
    for k in range(points + 1):
        if 0 < k < points:
            sides = (
                _partition_side(vsc, k, LocalVariable.TAU1, forms, Fraction(0)),
                _partition_side(vsc, k, LocalVariable.TAU2, forms, Fraction(0)),
            )
            values = _values_at(_member_pieces(vsc, k, LocalVariable.TAU1), Fraction(0))
            middle = tuple(form_sign(f, values) for f in forms)
            partitions.append(IntervalPartition(k, sides, middle))
        elif points:
            partitions.append(IntervalPartition(k, (_partition_side(vsc, k, LocalVariable.TAU, forms, None),)))
    log_stage_completion(logger, "rcvf3", time.monotonic() - started, points=points)
    return MVscTableau(
        base=vsc, forms=forms, point_form_signs=point_form_signs, intervals=tuple(partitions)
    )


# (<,⪯)-intervals


class LineKind(str, enum.Enum):
    POINT = "Point"
    IPLUS = "Iplus"
    IMINUS = "Iminus"
    JPLUS = "Jplus"
    JMINUS = "Jminus"
    JMID = "Jmid"


@dataclass(frozen=True)
class LineInterval:
    """
    A point or a (<,⪯)-interval.

    Iplus: x > a with v(x - a) in the range; Iminus: x < a with v(a - x) in
    the range. Jplus/Jminus: a < x < b with v(s) (resp. v(1 - s)) in the
    range, s = (x - a)/(b - a). Jmid: a < x < b with v(s) = v(1 - s) = 0.
    low == high is a single valuation; None bounds are infinite.
    """

    kind: LineKind
    a: ThomCode
    b: ThomCode | None = None
    low: Fraction | None = None
    high: Fraction | None = None
    a_position: int = 0
    b_position: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.low is not None and self.low == self.high

    def __str__(self) -> str:
        names = {
            LineKind.IPLUS: "I+",
            LineKind.IMINUS: "I-",
            LineKind.JPLUS: "J+",
            LineKind.JMINUS: "J-",
            LineKind.JMID: "J",
            LineKind.POINT: "P",
        }
        anchors = [str(self.a)] + ([str(self.b)] if self.b is not None else [])
        if self.kind in (LineKind.POINT, LineKind.JMID):
            return f"{names[self.kind]}({', '.join(anchors)})"
        if self.is_exact:
            bounds = [str(self.low)]
        else:
            bounds = [
                "-inf" if self.low is None else str(self.low),
                "inf" if self.high is None else str(self.high),
            ]
        return f"{names[self.kind]}({', '.join(anchors + bounds)})"


# Sample points


@dataclass(frozen=True)
class SamplePoint:
    """
    A point x of Q(s) with s = t^(1/q).

    `value` is stored as an element of Q(t) where t stands for s, so
    valuations read off it must be divided by q.
    """

    q: int
    value: OvfElem


def lift_scale(c: OvfElem, q: int) -> OvfElem:
    """Substitute t -> t^q."""
    num = sum((OvfElem.t(q * e) * coef for e, coef in c.num.items()), OvfElem.of(0))
    den = sum((OvfElem.t(q * e) * coef for e, coef in c.den.items()), OvfElem.of(0))
    return num / den


def anchor_value(vsc: VscTableau, position: int) -> OvfElem:
    """Exact value of a tableau point that is a root of a degree-one member."""
    for j, p in enumerate(vsc.polys):
        if p.degree == 1 and vsc.base.point_signs[j][position] == 0:
            return -p.coeff(0) / p.coeff(1)
    raise UnknownRoot(f"point {position} is not a root of a degree-one member; no exact value")


def sample_point(interval: LineInterval, vsc: VscTableau) -> SamplePoint:
    """A point of the piece, for anchors lying in K."""
    a = anchor_value(vsc, interval.a_position)
    b = anchor_value(vsc, interval.b_position) if interval.b_position is not None else None
    if interval.kind is LineKind.POINT:
        return SamplePoint(1, a)
    if interval.kind is LineKind.JMID:
        assert b is not None
        return SamplePoint(1, (a + b) / 2)
    tau = Piece(interval.low, interval.high, ()).sample()
    if interval.kind in (LineKind.JPLUS, LineKind.JMINUS) and interval.low is None:
        tau = Fraction(1)
    q = tau.denominator
    y = OvfElem.t(tau.numerator)
    a_q = lift_scale(a, q)
    if interval.kind is LineKind.IPLUS:
        return SamplePoint(q, a_q + y)
    if interval.kind is LineKind.IMINUS:
        return SamplePoint(q, a_q - y)
    assert b is not None
    b_q = lift_scale(b, q)
    if interval.kind is LineKind.JPLUS:
        return SamplePoint(q, a_q + y * (b_q - a_q))
    return SamplePoint(q, b_q - y * (b_q - a_q))
