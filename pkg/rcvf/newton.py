"""Newton polygon and the valuations of the roots of a polynomial over K."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from rcvf.errors import ZeroPolynomial
from rcvf.ovf_core import INF, GammaVal, KPoly, ovf_val
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class NewtonPolygon:
    """Vertices (index, valuation) of the lower convex hull."""

    vertices: tuple[tuple[int, GammaVal], ...]

    @property
    def edges(self) -> list[tuple[tuple[int, GammaVal], tuple[int, GammaVal]]]:
        return list(zip(self.vertices, self.vertices[1:]))


@dataclass(frozen=True)
class ValMultiset:
    """Root valuations with multiplicities, strictly decreasing, +inf first."""

    entries: tuple[tuple[GammaVal, int], ...]

    @property
    def total(self) -> int:
        return sum(m for _, m in self.entries)

    def __contains__(self, value: object) -> bool:
        return any(v == value for v, _ in self.entries)


def _cross(
    o: tuple[int, Fraction], a: tuple[int, Fraction], b: tuple[int, Fraction]
) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(p: KPoly) -> NewtonPolygon:
    """Lower convex hull of the points (i, v(p_i)) over nonzero coefficients."""
    if p.is_zero:
        raise ZeroPolynomial("Newton polygon of the zero polynomial")
    points = [
        (i, ovf_val(c).finite) for i, c in enumerate(p.coeffs) if not c.is_zero
    ]
    hull: list[tuple[int, Fraction]] = []
    for pt in points:
        # keep only strict left turns; collinear interior points are not vertices
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    return NewtonPolygon(tuple((i, GammaVal(v)) for i, v in hull))


def root_valuations(p: KPoly) -> ValMultiset:
    """Multiset of valuations of the roots of P in the algebraic closure."""
    if p.is_zero:
        raise ZeroPolynomial("root valuations of the zero polynomial")
    stripped, zero_roots = p.strip_zero_roots()
    entries: list[tuple[GammaVal, int]] = []
    if zero_roots:
        entries.append((INF, zero_roots))
    for (i, vi), (j, vj) in newton_polygon(stripped).edges:
        entries.append(((vi - vj).scale(Fraction(1, j - i)), j - i))
    logger.debug("Root valuations", degree=p.degree, entries=len(entries))
    return ValMultiset(tuple(entries))
