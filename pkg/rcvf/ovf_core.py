"""
Exact arithmetic for the ordered valued field K = Q(t).

t is a positive infinitesimal: the ordering makes an element positive when
the lowest-order coefficient of its numerator (with the denominator
normalized positive at lowest order) is positive, and the valuation is the
t-adic order. Field elements are sympy rational functions; polynomials over
K use sympy's dense univariate arithmetic over the same fraction field.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from itertools import product
from math import factorial
from typing import Any

from sympy import QQ
from sympy.polys.densearith import (
    dup_add,
    dup_mul,
    dup_mul_ground,
    dup_neg,
    dup_prem,
    dup_rem,
    dup_sub,
)
from sympy.polys.densebasic import dup_strip
from sympy.polys.densetools import (
    dup_compose,
    dup_diff,
    dup_eval,
    dup_mirror,
    dup_monic,
)
from sympy.polys.fields import FracElement, field
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement, PolyRing, ring

from rcvf.errors import DegreeOrder, NotInValuationRing, NotMonic, RNotInvertible
from utils.logger import get_logger

logger = get_logger(__name__)

KFIELD, T = field("t", QQ)
KDOMAIN = KFIELD.to_domain()

Sign = int


def _qq_to_fraction(q: Any) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _lowest_term(p: PolyElement) -> tuple[int, Any]:
    """Lowest exponent and its coefficient of a nonzero polynomial in t."""
    low = min(p.keys())
    return low[0], p[low]


@total_ordering
@dataclass(frozen=True)
class GammaVal:
    """Element of the divisible value group Q, or +infinity when value is None."""

    value: Fraction | None

    @classmethod
    def of(cls, value: int | Fraction | str) -> GammaVal:
        if isinstance(value, str):
            if value in ("inf", "+inf", "∞"):
                return INF
            return cls(Fraction(value))
        return cls(Fraction(value))

    @property
    def is_inf(self) -> bool:
        return self.value is None

    @property
    def finite(self) -> Fraction:
        if self.value is None:
            raise ValueError("valuation is +inf")
        return self.value

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, GammaVal):
            return NotImplemented
        if self.value is None:
            return False
        if other.value is None:
            return True
        return self.value < other.value

    def __add__(self, other: GammaVal | int | Fraction) -> GammaVal:
        other = _as_gamma(other)
        if self.value is None or other.value is None:
            return INF
        return GammaVal(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other: GammaVal | int | Fraction) -> GammaVal:
        other = _as_gamma(other)
        if other.value is None:
            raise ValueError("cannot subtract +inf")
        if self.value is None:
            return INF
        return GammaVal(self.value - other.value)

    def __neg__(self) -> GammaVal:
        return GammaVal(-self.finite)

    def scale(self, factor: int | Fraction) -> GammaVal:
        """Multiply by a rational; +inf is kept for positive factors."""
        factor = Fraction(factor)
        if self.value is None:
            if factor > 0:
                return INF
            raise ValueError("cannot scale +inf by a non-positive factor")
        return GammaVal(self.value * factor)

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


def _as_gamma(x: GammaVal | int | Fraction) -> GammaVal:
    return x if isinstance(x, GammaVal) else GammaVal(Fraction(x))


INF = GammaVal(None)
ZERO_VAL = GammaVal(Fraction(0))


@dataclass(frozen=True)
class OvfElem:
    """Element of Q(t) stored as a canonical sympy rational function."""

    value: FracElement

    @classmethod
    def of(cls, x: OvfElem | FracElement | int | Fraction) -> OvfElem:
        if isinstance(x, OvfElem):
            return x
        if isinstance(x, Fraction):
            return cls(KFIELD.ground_new(QQ(x.numerator, x.denominator)))
        if isinstance(x, int):
            return cls(KFIELD(x))
        return cls(x)

    @classmethod
    def t(cls, power: int = 1) -> OvfElem:
        return cls(T**power)

    def __add__(self, other: OvfElem | int | Fraction) -> OvfElem:
        return OvfElem(self.value + OvfElem.of(other).value)

    __radd__ = __add__

    def __sub__(self, other: OvfElem | int | Fraction) -> OvfElem:
        return OvfElem(self.value - OvfElem.of(other).value)

    def __rsub__(self, other: OvfElem | int | Fraction) -> OvfElem:
        return OvfElem(OvfElem.of(other).value - self.value)

    def __mul__(self, other: OvfElem | int | Fraction) -> OvfElem:
        return OvfElem(self.value * OvfElem.of(other).value)

    __rmul__ = __mul__

    def __truediv__(self, other: OvfElem | int | Fraction) -> OvfElem:
        divisor = OvfElem.of(other)
        if divisor.is_zero:
            raise ZeroDivisionError("division by zero in Q(t)")
        return OvfElem(self.value / divisor.value)

    def __rtruediv__(self, other: OvfElem | int | Fraction) -> OvfElem:
        return OvfElem.of(other) / self

    def __neg__(self) -> OvfElem:
        return OvfElem(-self.value)

    def __pow__(self, n: int) -> OvfElem:
        return OvfElem(self.value**n)

    @property
    def is_zero(self) -> bool:
        return not self.value

    @property
    def is_rational(self) -> bool:
        """True when the element lies in Q (trivial-valuation subfield)."""
        return self.value.numer.is_ground and self.value.denom.is_ground

    @property
    def num(self) -> dict[int, Fraction]:
        """Numerator coefficients by exponent of t, normalized with den."""
        return self._normalized()[0]

    @property
    def den(self) -> dict[int, Fraction]:
        """Denominator coefficients; lowest-order coefficient is +1."""
        return self._normalized()[1]

    def _normalized(self) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
        if self.is_zero:
            return {}, {0: Fraction(1)}
        numer, denom = self.value.numer, self.value.denom
        _, c = _lowest_term(denom)
        scale = _qq_to_fraction(c)
        num = {m[0]: _qq_to_fraction(v) / scale for m, v in numer.items()}
        den = {m[0]: _qq_to_fraction(v) / scale for m, v in denom.items()}
        return num, den

    def to_rational(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not in Q")
        return _qq_to_fraction(self.value.numer.LC) / _qq_to_fraction(
            self.value.denom.LC
        )

    def specialize(self, t0: Fraction) -> Fraction:
        """Evaluate at t = t0; raises ZeroDivisionError on a pole."""
        num, den = self._normalized()
        n = sum((c * t0**e for e, c in num.items()), Fraction(0))
        d = sum((c * t0**e for e, c in den.items()), Fraction(0))
        if d == 0:
            raise ZeroDivisionError(f"pole of {self} at t = {t0}")
        return n / d

    def __str__(self) -> str:
        num, den = self._normalized()
        if den == {0: Fraction(1)}:
            return _format_tpoly(num)
        return f"({_format_tpoly(num)})/({_format_tpoly(den)})"


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_tpoly(coeffs: dict[int, Fraction]) -> str:
    if not coeffs:
        return "0"
    out = ""
    for i, e in enumerate(sorted(coeffs)):
        c = coeffs[e]
        mag = abs(c)
        if e == 0:
            body = _format_rational(mag)
        else:
            mono = "t" if e == 1 else f"t^{e}"
            if mag == 1:
                body = mono
            elif mag.denominator == 1:
                body = f"{mag.numerator}*{mono}"
            else:
                body = f"({_format_rational(mag)})*{mono}"
        if i == 0:
            out = f"-{body}" if c < 0 else body
        else:
            out += f" - {body}" if c < 0 else f" + {body}"
    return out


def ovf_sign(x: OvfElem) -> Sign:
    """Sign of x with t a positive infinitesimal."""
    if x.is_zero:
        return 0
    _, cn = _lowest_term(x.value.numer)
    _, cd = _lowest_term(x.value.denom)
    return (1 if cn > 0 else -1) * (1 if cd > 0 else -1)


def ovf_val(x: OvfElem) -> GammaVal:
    """t-adic valuation; +inf for zero."""
    if x.is_zero:
        return INF
    en, _ = _lowest_term(x.value.numer)
    ed, _ = _lowest_term(x.value.denom)
    return GammaVal(Fraction(en - ed))


def ovf_preceq(x: OvfElem, y: OvfElem) -> bool:
    """Divisibility predicate x ⪯ y, i.e. v(x) <= v(y)."""
    return ovf_val(x) <= ovf_val(y)


def ovf_residue(x: OvfElem) -> Fraction:
    """Image of x in the residue field Q (evaluation at t = 0)."""
    v = ovf_val(x)
    if v < ZERO_VAL:
        raise NotInValuationRing(f"residue of {x} undefined: valuation {v} < 0")
    if v > ZERO_VAL:
        return Fraction(0)
    _, cn = _lowest_term(x.value.numer)
    _, cd = _lowest_term(x.value.denom)
    return _qq_to_fraction(cn) / _qq_to_fraction(cd)


def _dense(coeffs: Sequence[OvfElem]) -> list[FracElement]:
    return [c.value for c in reversed(coeffs)]


@dataclass(frozen=True)
class KPoly:
    """Univariate polynomial over K, coefficients listed from degree 0 upward."""

    coeffs: tuple[OvfElem, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(OvfElem.of(c) for c in self.coeffs)
        while coeffs and coeffs[-1].is_zero:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def of(cls, coeffs: Iterable[OvfElem | int | Fraction]) -> KPoly:
        return cls(tuple(OvfElem.of(c) for c in coeffs))

    @classmethod
    def from_dense(cls, dense: Sequence[FracElement]) -> KPoly:
        return cls(tuple(OvfElem(c) for c in reversed(dup_strip(list(dense)))))

    @classmethod
    def x(cls) -> KPoly:
        return cls.of([0, 1])

    @classmethod
    def constant(cls, c: OvfElem | int | Fraction) -> KPoly:
        return cls.of([c])

    @property
    def dense(self) -> list[FracElement]:
        return _dense(self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> OvfElem:
        return self.coeffs[-1] if self.coeffs else OvfElem.of(0)

    def coeff(self, k: int) -> OvfElem:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else OvfElem.of(0)

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.lc.value == KFIELD.one

    def __add__(self, other: KPoly) -> KPoly:
        return KPoly.from_dense(dup_add(self.dense, other.dense, KDOMAIN))

    def __sub__(self, other: KPoly) -> KPoly:
        return KPoly.from_dense(dup_sub(self.dense, other.dense, KDOMAIN))

    def __mul__(self, other: KPoly | OvfElem | int | Fraction) -> KPoly:
        if isinstance(other, KPoly):
            return KPoly.from_dense(dup_mul(self.dense, other.dense, KDOMAIN))
        return KPoly.from_dense(
            dup_mul_ground(self.dense, OvfElem.of(other).value, KDOMAIN)
        )

    __rmul__ = __mul__

    def __neg__(self) -> KPoly:
        return KPoly.from_dense(dup_neg(self.dense, KDOMAIN))

    def __pow__(self, n: int) -> KPoly:
        result = KPoly.of([1])
        for _ in range(n):
            result = result * self
        return result

    def derivative(self, k: int = 1) -> KPoly:
        return KPoly.from_dense(dup_diff(self.dense, k, KDOMAIN))

    def divided_derivative(self, k: int) -> KPoly:
        return kpoly_divided_derivative(self, k)

    def evaluate(self, a: OvfElem | int | Fraction) -> OvfElem:
        if self.is_zero:
            return OvfElem.of(0)
        return OvfElem(dup_eval(self.dense, OvfElem.of(a).value, KDOMAIN))

    def monic(self) -> KPoly:
        return KPoly.from_dense(dup_monic(self.dense, KDOMAIN))

    def mirror(self) -> KPoly:
        """P(-X)."""
        return KPoly.from_dense(dup_mirror(self.dense, KDOMAIN))

    def compose(self, other: KPoly) -> KPoly:
        return KPoly.from_dense(dup_compose(self.dense, other.dense, KDOMAIN))

    def shift(self, a: OvfElem | int | Fraction) -> KPoly:
        """P(X + a)."""
        return self.compose(KPoly.of([a, 1]))

    def rem(self, other: KPoly) -> KPoly:
        """Exact Euclidean remainder over K."""
        return KPoly.from_dense(dup_rem(self.dense, other.dense, KDOMAIN))

    def strip_zero_roots(self) -> tuple[KPoly, int]:
        """Remove the factor X^n of P; returns (P / X^n, n)."""
        n = 0
        while n < len(self.coeffs) and self.coeffs[n].is_zero:
            n += 1
        return KPoly(self.coeffs[n:]), n

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts: list[str] = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c.is_zero:
                continue
            mono = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
            negative = False
            if c.is_rational:
                q = c.to_rational()
                negative = q < 0
                mag = abs(q)
                if not mono:
                    body = _format_rational(mag)
                elif mag == 1:
                    body = mono
                elif mag.denominator == 1:
                    body = f"{mag.numerator}*{mono}"
                else:
                    body = f"({_format_rational(mag)})*{mono}"
            else:
                body = f"({c})" + (f"*{mono}" if mono else "")
            if not parts:
                parts.append(f"-{body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(parts)


def kpoly_divided_derivative(p: KPoly, k: int) -> KPoly:
    """P^[k] = P^(k) / k!."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    if k == 0:
        return p
    return p.derivative(k) * Fraction(1, factorial(k))


def pseudo_rem_exponent(p: KPoly, q: KPoly) -> int:
    """Even exponent e with lc(Q)^e * P = S * Q + prem(P, Q)."""
    e = p.degree - q.degree + 1
    return e if e % 2 == 0 else e + 1


def kpoly_pseudo_rem(p: KPoly, q: KPoly) -> KPoly:
    """Pseudo-remainder of P by Q scaled by an even power of lc(Q)."""
    if q.degree < 1 or p.degree < q.degree:
        raise DegreeOrder(
            f"pseudo-remainder needs deg(P) >= deg(Q) >= 1, got {p.degree}, {q.degree}"
        )
    r = KPoly.from_dense(dup_prem(p.dense, q.dense, KDOMAIN))
    if (p.degree - q.degree + 1) % 2:
        r = r * q.lc
    return r


@lru_cache(maxsize=16)
def tschirnhaus_ring(m: int) -> tuple[PolyRing, tuple[PolyElement, ...]]:
    """Polynomial ring K[Y1, ..., Ym] used to express Tschirnhaus transforms."""
    names = ",".join(f"Y{j + 1}" for j in range(m))
    r, *gens = ring(names, KDOMAIN)
    return r, tuple(gens)


def _kpoly_in_var(p: KPoly, r: PolyRing, var: PolyElement) -> PolyElement:
    out = r.zero
    for k, c in enumerate(p.coeffs):
        if not c.is_zero:
            out += var**k * c.value
    return out


def _multiplication_matrix(ps: Sequence[KPoly], q: PolyElement) -> DomainMatrix:
    r, gens = tschirnhaus_ring(len(ps))
    modulus = [_kpoly_in_var(p, r, g) for p, g in zip(ps, gens)]
    basis = list(product(*(range(p.degree) for p in ps)))
    rows = []
    for mono in basis:
        reduced = (q * r({mono: KDOMAIN.one})).rem(modulus)
        rows.append([reduced.get(b, KDOMAIN.zero) for b in basis])
    n = len(basis)
    return DomainMatrix(rows, (n, n), KDOMAIN)


def _check_monic(ps: Sequence[KPoly]) -> None:
    for p in ps:
        if not p.is_monic:
            raise NotMonic(f"Tschirnhaus transform requires monic input, got {p}")


def _charpoly(matrix: DomainMatrix) -> KPoly:
    if matrix.shape[0] == 0:
        return KPoly.of([1])
    return KPoly.from_dense(matrix.charpoly())


def tschirnhaus_charpoly(ps: Sequence[KPoly], q: PolyElement) -> KPoly:
    """
    Characteristic polynomial of multiplication by Q on K[Y]/(P_1(Y_1), ...).

    Its roots are the values Q(x_1, ..., x_m) over all tuples of roots of the
    P_j in the algebraic closure, counted with multiplicity.
    """
    _check_monic(ps)
    a_q = _multiplication_matrix(ps, q)
    logger.debug("Tschirnhaus transform", size=a_q.shape[0], factors=len(ps))
    return _charpoly(a_q)


def tschirnhaus_rational(ps: Sequence[KPoly], q: PolyElement, r: PolyElement) -> KPoly:
    """Characteristic polynomial of multiplication by Q/R on the same quotient."""
    _check_monic(ps)
    a_q = _multiplication_matrix(ps, q)
    a_r = _multiplication_matrix(ps, r)
    if a_r.shape[0] == 0:
        return KPoly.of([1])
    if not a_r.det():
        raise RNotInvertible("multiplication-by-R matrix is singular")
    return _charpoly(a_q.matmul(a_r.inv()))
