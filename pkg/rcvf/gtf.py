"""
Generalized Taylor formulas.

For a degree d and a sign pattern epsilon the identity reads

    P(x) = P(a_0) + sum_{k=1}^{d-1} eps_k H_k(e1, e2) P^[k](a_k) + eps_d H_d(e1, e2) P^[d]

with x = a + e1, b = x + e2 and each a_k one of the endpoints a, b. The forms
H_k are homogeneous of degree k with nonnegative integer coefficients.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from sympy import ZZ
from sympy.polys.rings import PolyElement, ring

from rcvf.errors import ConstructionFailed, InconsistentInput
from rcvf.ovf_core import INF, GammaVal, KPoly, OvfElem
from utils.logger import get_logger

logger = get_logger(__name__)

_E_RING, _E1, _E2 = ring("e1,e2", ZZ)


class Endpoint(str, enum.Enum):
    A = "a"
    B = "b"

    @property
    def other(self) -> Endpoint:
        return Endpoint.B if self is Endpoint.A else Endpoint.A


class Direction(str, enum.Enum):
    TAU1 = "tau1"
    TAU2 = "tau2"
    CONSTANT = "constant"


Monomials = tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class GtfIdentity:
    """
    A generalized Taylor formula.

    h[k - 1] lists the monomials (e1 exponent, e2 exponent, coefficient) of H_k.
    """

    degree: int
    epsilon: tuple[int, ...]
    endpoints: tuple[Endpoint, ...]
    h: tuple[Monomials, ...]

    def form(self, k: int) -> PolyElement:
        """H_k as a polynomial in e1, e2."""
        return _E_RING({(i, j): c for i, j, c in self.h[k - 1]})

    def __str__(self) -> str:
        first = f"P({self.endpoints[0].value})"
        parts = [first]
        for k in range(1, self.degree + 1):
            sign = "+" if self.epsilon[k - 1] > 0 else "-"
            at = f"({self.endpoints[k].value})" if k < self.degree else ""
            parts.append(f"{sign} ({_format_form(self.h[k - 1])})*P^[{k}]{at}")
        return "P(x) = " + " ".join(parts)


def _format_form(monomials: Monomials) -> str:
    terms = []
    for i, j, c in monomials:
        factors = [str(c)] if c != 1 else []
        if i:
            factors.append("e1" if i == 1 else f"e1^{i}")
        if j:
            factors.append("e2" if j == 1 else f"e2^{j}")
        terms.append("*".join(factors) or "1")
    return " + ".join(terms)


def endpoint_pattern(epsilon: Sequence[int]) -> tuple[Endpoint, ...]:
    """a_k = a iff eps_k * eps_{k+1} = 1, with eps_0 = 1."""
    signs = (1, *epsilon)
    return tuple(
        Endpoint.A if signs[k] * signs[k + 1] == 1 else Endpoint.B
        for k in range(len(epsilon))
    )


def _as_monomials(p: PolyElement) -> Monomials:
    return tuple(sorted(((i, j, int(c)) for (i, j), c in p.items()), reverse=True))


@lru_cache(maxsize=None)
def _build(d: int, epsilon: tuple[int, ...]) -> GtfIdentity:
    ends = endpoint_pattern(epsilon)
    e = _E1 + _E2
    # step from endpoint u to endpoint w: u - w
    step = {(Endpoint.A, Endpoint.B): -e, (Endpoint.B, Endpoint.A): e}

    g: list[dict[Endpoint, PolyElement]] = [
        {Endpoint.A: _E_RING.zero, Endpoint.B: _E_RING.zero} for _ in range(d + 1)
    ]
    start = ends[0]
    base = _E1 if start is Endpoint.A else -_E2
    for k in range(d + 1):
        g[k][start] = base**k

    for k in range(1, d):
        target = ends[k]
        other = target.other
        moved = g[k][other]
        if not moved:
            continue
        g[k][other] = _E_RING.zero
        for j in range(d - k + 1):
            g[k + j][target] += comb(k + j, j) * step[(other, target)] ** j * moved

    forms = []
    for k in range(1, d + 1):
        gk = g[k][Endpoint.A] + g[k][Endpoint.B] if k == d else g[k][ends[k]]
        hk = epsilon[k - 1] * gk
        if any(c < 0 for c in hk.values()):
            raise ConstructionFailed(
                f"negative coefficient in H_{k} for epsilon={epsilon}: {hk}"
            )
        forms.append(_as_monomials(hk))

    logger.debug("Built generalized Taylor formula", degree=d, epsilon=epsilon)
    return GtfIdentity(degree=d, epsilon=epsilon, endpoints=ends, h=tuple(forms))


def build_gtf(d: int, epsilon: Sequence[int]) -> GtfIdentity:
    """Construct the generalized Taylor formula of degree d for the sign pattern."""
    eps = tuple(int(s) for s in epsilon)
    if d < 1 or len(eps) != d or any(s not in (-1, 1) for s in eps):
        raise ValueError(f"invalid GTF request d={d}, epsilon={eps}")
    return _build(d, eps)


def parse_pattern(pattern: str) -> tuple[int, ...]:
    """Turn a '+'/'-' string into a sign tuple."""
    table = {"+": 1, "-": -1}
    if not pattern or any(ch not in table for ch in pattern):
        raise ValueError(f"sign pattern must be a string of '+' and '-': {pattern!r}")
    return tuple(table[ch] for ch in pattern)


def gtf_slopes(identity: GtfIdentity) -> tuple[int, ...]:
    """Minimal exponent of e1 (eps_1 = 1) or e2 (eps_1 = -1) in each H_k."""
    pos = 0 if identity.epsilon[0] == 1 else 1
    return tuple(min(m[pos] for m in form) for form in identity.h)


@dataclass(frozen=True)
class PlvDescriptor:
    """v(P(x)) = min(base, min_j(offset_j + slope_j * tau')) for tau' >= 0."""

    base: GammaVal
    terms: tuple[tuple[GammaVal, int], ...]
    direction: Direction

    def evaluate(self, tau_prime: Fraction | int) -> GammaVal:
        tau_prime = Fraction(tau_prime)
        if tau_prime < 0:
            raise ValueError("tau' must be nonnegative")
        best = self.base
        for offset, slope in self.terms:
            best = min(best, offset + tau_prime * slope)
        return best


def valuation_on_interval(
    d: int,
    epsilon: Sequence[int],
    nus: Sequence[GammaVal],
    delta: GammaVal,
    far_value: GammaVal | None = None,
) -> PlvDescriptor:
    """
    Piecewise-linear descriptor of v(P(x)) on a Thom interval.

    far_value, when known, is v(P) at the endpoint other than a_0. It must
    equal the descriptor at tau' = 0.
    """
    if len(nus) != d + 1 or len(epsilon) != d:
        raise InconsistentInput(f"need {d + 1} valuations and {d} signs")
    if nus[d].is_inf or delta.is_inf:
        raise InconsistentInput("top derivative and gap valuations must be finite")
    slopes = gtf_slopes(build_gtf(d, epsilon))
    terms = tuple(
        (nus[j] + delta.scale(j), slopes[j - 1]) for j in range(1, d + 1)
    )
    floor = min((offset for offset, _ in terms), default=INF)
    if far_value is not None and far_value != min(nus[0], floor):
        raise InconsistentInput(
            f"value {far_value} at the far endpoint does not match {min(nus[0], floor)}"
        )
    if nus[0] <= floor:
        direction = Direction.CONSTANT
    else:
        direction = Direction.TAU1 if epsilon[0] == 1 else Direction.TAU2
    return PlvDescriptor(base=nus[0], terms=terms, direction=direction)


def evaluate_gtf(
    identity: GtfIdentity,
    p: KPoly,
    a: OvfElem,
    b: OvfElem,
    x: OvfElem,
) -> list[OvfElem]:
    """Summands of the identity at concrete a, b, x; they add up to P(x)."""
    e1, e2 = x - a, b - x
    point = {Endpoint.A: a, Endpoint.B: b}
    summands = [p.evaluate(point[identity.endpoints[0]])]
    for k in range(1, identity.degree + 1):
        hk = OvfElem.of(0)
        for i, j, c in identity.h[k - 1]:
            hk = hk + (e1**i) * (e2**j) * c
        at = point[identity.endpoints[k]] if k < identity.degree else a
        dk = p.divided_derivative(k).evaluate(at)
        summands.append(hk * dk * identity.epsilon[k - 1])
    return summands


def verify_identity(identity: GtfIdentity) -> bool:
    """Expand the right-hand side over generic coefficients and compare with P(x)."""
    d = identity.degree
    names = ",".join([f"p{i}" for i in range(d + 1)] + ["a", "e1", "e2"])
    _, *gens = ring(names, ZZ)
    coeffs, a, e1, e2 = gens[: d + 1], gens[d + 1], gens[d + 2], gens[d + 3]
    x, b = a + e1, a + e1 + e2

    def divided(k: int, y: PolyElement) -> PolyElement:
        return sum(
            (comb(i, k) * coeffs[i] * y ** (i - k) for i in range(k, d + 1)),
            a.ring.zero,
        )

    point = {Endpoint.A: a, Endpoint.B: b}
    rhs = divided(0, point[identity.endpoints[0]])
    for k in range(1, d + 1):
        hk = sum(
            (c * e1**i * e2**j for i, j, c in identity.h[k - 1]), a.ring.zero
        )
        at = point[identity.endpoints[k]] if k < d else a
        rhs += identity.epsilon[k - 1] * hk * divided(k, at)
    return rhs == divided(0, x)
