"""
Thom codes and complete sign tableaux (Cohen-Hörmander).

A family closed under derivation and remainder is described by a
FamilyShape: degrees, derivative links, remainder links and the signs of the
leading coefficients and constants. The induction in cohen_hormander() only
reads the shape, so the same engine serves the ground tableau here and the
parametrized case trees of the qe package.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

from rcvf.errors import InternalInvariantViolated, InvalidCode, UnknownPoly, UnknownRoot
from rcvf.ovf_core import KPoly, Sign, ovf_sign
from utils.logger import get_logger

logger = get_logger(__name__)

Provenance = (
    tuple[Literal["input"], int]
    | tuple[Literal["derivative"], int]
    | tuple[Literal["remainder"], int, int]
)


@dataclass(frozen=True)
class RemainderLink:
    """Rem(P_i, P_j) is member `target` (None when zero), scaled by lc(P_j)^shift."""

    target: int | None
    shift: int = 0


@dataclass(frozen=True)
class FamilyShape:
    degrees: tuple[int, ...]
    derivative: tuple[int | None, ...]
    remainders: dict[tuple[int, int], RemainderLink]
    lead_signs: tuple[Sign, ...]

    def __len__(self) -> int:
        return len(self.degrees)

    def derivative_chain(self, i: int) -> list[int]:
        """Indices of P_i', P_i'', ... down to the constant derivative."""
        chain = []
        j = self.derivative[i]
        while j is not None:
            chain.append(j)
            j = self.derivative[j]
        return chain


@dataclass(frozen=True)
class Insertion:
    """A root of `member` placed between point ids `left` and `right`."""

    member: int
    point: int
    left: int | None
    right: int | None


@dataclass(frozen=True)
class SignMatrix:
    """
    Result of the Cohen-Hörmander induction.

    Points are identified by insertion id; `order` lists ids from left to
    right. point_signs[j][pos] and interval_signs[j][k] use final positions,
    interval k lying between points k - 1 and k.
    """

    order: tuple[int, ...]
    owners: tuple[int, ...]
    point_signs: tuple[tuple[Sign, ...], ...]
    interval_signs: tuple[tuple[Sign, ...], ...]
    history: tuple[Insertion, ...]

    def position(self, point_id: int) -> int:
        return self.order.index(point_id)


def cohen_hormander(shape: FamilyShape) -> SignMatrix:
    """Run the induction over the members in family order."""
    n = len(shape)
    order: list[int] = []
    owners: list[int] = []
    signs: list[dict[int, Sign]] = []
    history: list[Insertion] = []

    def at_minus_inf(j: int) -> Sign:
        return shape.lead_signs[j] * (-1 if shape.degrees[j] % 2 else 1)

    for m in range(n):
        if shape.degrees[m] <= 0:
            signs.append({pid: shape.lead_signs[m] for pid in order})
            continue

        row: dict[int, Sign] = {}
        for pid in order:
            owner = owners[pid]
            link = shape.remainders.get((m, owner))
            if owner == m or link is None:
                raise InternalInvariantViolated(
                    f"missing remainder link ({m}, {owner}) in closed family"
                )
            row[pid] = 0 if link.target is None else signs[link.target][pid]

        slots: list[int | None] = [None, *order, None]
        new_order: list[int] = []
        for left, right in zip(slots, slots[1:]):
            if left is not None:
                new_order.append(left)
            s_left = row[left] if left is not None else at_minus_inf(m)
            s_right = row[right] if right is not None else shape.lead_signs[m]
            if s_left * s_right < 0:
                pid = len(owners)
                owners.append(m)
                for j in range(m):
                    signs[j][pid] = _interval_sign(
                        shape, signs, j, left, right, at_minus_inf
                    )
                row[pid] = 0
                new_order.append(pid)
                history.append(Insertion(member=m, point=pid, left=left, right=right))
        order = new_order
        signs.append(row)

    point_signs = tuple(tuple(signs[j][pid] for pid in order) for j in range(n))
    interval_signs = tuple(
        tuple(
            _interval_sign(
                shape,
                signs,
                j,
                order[k - 1] if k > 0 else None,
                order[k] if k < len(order) else None,
                at_minus_inf,
            )
            for k in range(len(order) + 1)
        )
        for j in range(n)
    )
    logger.debug("Sign matrix built", members=n, points=len(order))
    return SignMatrix(
        order=tuple(order),
        owners=tuple(owners),
        point_signs=point_signs,
        interval_signs=interval_signs,
        history=tuple(history),
    )


def _interval_sign(
    shape: FamilyShape,
    signs: list[dict[int, Sign]],
    j: int,
    left: int | None,
    right: int | None,
    at_minus_inf: object,
) -> Sign:
    """Sign of member j on the open interval between two consecutive points."""
    if shape.degrees[j] <= 0:
        return shape.lead_signs[j]
    if left is None:
        return at_minus_inf(j)  # type: ignore[operator]
    s = signs[j][left]
    if s != 0:
        return s
    # member vanishes at left: it increases iff its derivative is positive
    d = shape.derivative[j]
    if d is None:
        raise InternalInvariantViolated(f"member {j} has no derivative link")
    return _interval_sign(shape, signs, d, left, right, at_minus_inf)


# Ground families


@dataclass(frozen=True)
class ClosedFamily:
    """Members ordered by degree (ties by insertion) with their provenance."""

    polys: tuple[KPoly, ...]
    provenance: tuple[Provenance, ...]
    derivative: tuple[int | None, ...]
    remainders: dict[tuple[int, int], int | None] = field(hash=False)

    @property
    def constants(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.polys) if p.degree <= 0)

    @property
    def inputs(self) -> dict[int, int]:
        """Input position to member index."""
        return {prov[1]: i for i, prov in enumerate(self.provenance) if prov[0] == "input"}

    def index(self, p: KPoly) -> int:
        try:
            return self.polys.index(p)
        except ValueError:
            raise UnknownPoly(f"{p} is not a member of the closed family") from None

    def shape(self) -> FamilyShape:
        return FamilyShape(
            degrees=tuple(p.degree for p in self.polys),
            derivative=self.derivative,
            remainders={
                key: RemainderLink(target) for key, target in self.remainders.items()
            },
            lead_signs=tuple(ovf_sign(p.lc) for p in self.polys),
        )


def close_family(inputs: Sequence[KPoly]) -> ClosedFamily:
    """Close a list of polynomials under P -> P' and (P, Q) -> Rem(P, Q)."""
    members: list[KPoly] = []
    provenance: list[Provenance] = []
    found: dict[KPoly, int] = {}
    deriv: dict[int, int | None] = {}
    rems: dict[tuple[int, int], int | None] = {}

    def add(p: KPoly, prov: Provenance) -> int | None:
        if p.is_zero:
            return None
        if p in found:
            return found[p]
        found[p] = len(members)
        members.append(p)
        provenance.append(prov)
        return found[p]

    for pos, p in enumerate(inputs):
        if p.is_zero:
            continue
        add(p, ("input", pos))

    cursor = 0
    while cursor < len(members):
        p = members[cursor]
        if p.degree >= 1:
            deriv[cursor] = add(p.derivative(), ("derivative", cursor))
        else:
            deriv[cursor] = None
        for other in range(cursor + 1):
            for i, j in ((cursor, other), (other, cursor)):
                if i == j or (i, j) in rems:
                    continue
                pi, pj = members[i], members[j]
                if pi.degree >= pj.degree >= 1:
                    rems[(i, j)] = add(pi.rem(pj), ("remainder", i, j))
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

    family = ClosedFamily(
        polys=tuple(members[i] for i in perm),
        provenance=tuple(remap_prov(provenance[i]) for i in perm),
        derivative=tuple(remap(deriv[i]) for i in perm),
        remainders={
            (new_index[i], new_index[j]): remap(t) for (i, j), t in rems.items()
        },
    )
    logger.debug("Closed family", inputs=len(inputs), members=len(members))
    return family


@dataclass(frozen=True)
class ThomCode:
    """A real root of a monic polynomial with the signs of its derivatives there."""

    poly: KPoly
    sigma: tuple[Sign, ...]

    def __str__(self) -> str:
        marks = {1: "+", 0: "0", -1: "-"}
        return f"[{self.poly} ; {''.join(marks[s] for s in self.sigma)}]"


def thom_code(poly: KPoly, sigma: Sequence[Sign]) -> ThomCode:
    """Code a root of `poly`; signs refer to its derivatives and are normalized to the monic form."""
    if poly.degree < 1:
        raise InvalidCode(f"{poly} has no roots to code")
    flip = ovf_sign(poly.lc)
    sigma = tuple(int(s) * flip for s in sigma)
    if len(sigma) != poly.degree - 1:
        raise InvalidCode(
            f"code for a degree {poly.degree} polynomial needs {poly.degree - 1} signs"
        )
    return ThomCode(poly=poly.monic(), sigma=sigma)


def parse_sigma(text: str) -> tuple[Sign, ...]:
    table = {"+": 1, "-": -1, "0": 0}
    if any(ch not in table for ch in text):
        raise ValueError(f"sign string must use '+', '-' and '0': {text!r}")
    return tuple(table[ch] for ch in text)


@dataclass(frozen=True)
class SignTableau:
    """Complete tableau of signs of a closed family."""

    family: ClosedFamily
    roots: tuple[ThomCode, ...]
    point_signs: tuple[tuple[Sign, ...], ...]
    interval_signs: tuple[tuple[Sign, ...], ...]
    matrix: SignMatrix = field(compare=False, repr=False)

    @property
    def polys(self) -> tuple[KPoly, ...]:
        return self.family.polys

    def root_index(self, code: ThomCode) -> int:
        try:
            return self.roots.index(code)
        except ValueError:
            raise UnknownRoot(f"{code} is not a root of this tableau") from None


def _code_at(
    family: ClosedFamily, shape: FamilyShape, matrix: SignMatrix, pid: int
) -> ThomCode:
    owner = matrix.owners[pid]
    pos = matrix.position(pid)
    lead = ovf_sign(family.polys[owner].lc)
    chain = shape.derivative_chain(owner)[:-1]
    sigma = tuple(matrix.point_signs[d][pos] * lead for d in chain)
    return ThomCode(poly=family.polys[owner].monic(), sigma=sigma)


def sign_tableau(family: ClosedFamily) -> SignTableau:
    """Complete tableau of signs for a closed family."""
    shape = family.shape()
    matrix = cohen_hormander(shape)
    roots = tuple(_code_at(family, shape, matrix, pid) for pid in matrix.order)
    return SignTableau(
        family=family,
        roots=roots,
        point_signs=matrix.point_signs,
        interval_signs=matrix.interval_signs,
        matrix=matrix,
    )


def tableau_of(polys: Sequence[KPoly]) -> SignTableau:
    return sign_tableau(close_family(polys))


def sign_at_root(q: KPoly, code: ThomCode, tableau: SignTableau) -> Sign:
    """Sign of Q at a coded root of the tableau."""
    k = tableau.root_index(code)
    j = tableau.family.index(q)
    return tableau.point_signs[j][k]


def locate_code(tableau: SignTableau, code: ThomCode) -> int:
    """Position of the coded root among the tableau points."""
    family = tableau.family
    owner = family.index(code.poly)
    chain = family.shape().derivative_chain(owner)[:-1]
    signs = tableau.point_signs

    def matches(k: int, strict: bool) -> bool:
        if signs[owner][k] != 0:
            return False
        for s, d in zip(code.sigma, chain):
            actual = signs[d][k]
            if strict and actual != s:
                return False
            if not strict and (s * actual < 0 or (s == 0 and actual != 0)):
                return False
        return True

    for strict in (True, False):
        hits = [k for k in range(len(tableau.roots)) if matches(k, strict)]
        if hits:
            return hits[0]
    raise InvalidCode(f"{code} matches no real root of its polynomial")


def sign_at_code(f: KPoly, code: ThomCode) -> Sign:
    """Sign of an arbitrary polynomial F at a coded root."""
    tableau = tableau_of([code.poly, f])
    k = locate_code(tableau, code)
    if f.is_zero:
        return 0
    return tableau.point_signs[tableau.family.index(f)][k]


class Ordering(str, enum.Enum):
    LT = "LT"
    EQ = "EQ"
    GT = "GT"


def compare_roots(c1: ThomCode, c2: ThomCode) -> Ordering:
    """Order of two coded real algebraic numbers."""
    tableau = tableau_of([c1.poly, c2.poly])
    k1, k2 = locate_code(tableau, c1), locate_code(tableau, c2)
    if k1 < k2:
        return Ordering.LT
    if k1 > k2:
        return Ordering.GT
    return Ordering.EQ


def restrict(tableau: SignTableau, keep: Sequence[int]) -> tuple[
    tuple[int, ...],
    tuple[tuple[Sign, ...], ...],
    tuple[tuple[Sign, ...], ...],
]:
    """
    Restrict a tableau to the members `keep`.

    Returns the retained point positions with the restricted point and
    interval sign matrices.
    """
    points = tuple(
        k
        for k in range(len(tableau.roots))
        if any(tableau.point_signs[j][k] == 0 for j in keep)
    )
    point_signs = tuple(tuple(tableau.point_signs[j][k] for k in points) for j in keep)
    # interval after retained point k starts with old interval k + 1
    firsts = (0, *(k + 1 for k in points))
    interval_signs = tuple(
        tuple(tableau.interval_signs[j][k] for k in firsts) for j in keep
    )
    return points, point_signs, interval_signs
