"""
Q-semilinear terms over symbolic valuations.

A term is built from constants of the value group, symbols v(c) standing for
the valuation of a nonzero parameter constant c, rational linear combinations,
min and max. Smart constructors fold constants, so a term built only from
constants is always a Const and ground callers can read its value directly.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction

from rcvf.ovf_core import INF, GammaVal


class QlTerm:
    """Base class of term nodes."""

    def evaluate(self, assignment: Mapping[Hashable, GammaVal]) -> GammaVal:
        raise NotImplementedError

    @property
    def is_const(self) -> bool:
        return isinstance(self, Const)

    @property
    def is_inf(self) -> bool:
        return isinstance(self, Const) and self.value.is_inf

    def symbols(self) -> set[ValOf]:
        raise NotImplementedError

    def __add__(self, other: QlTerm | GammaVal | int | Fraction) -> QlTerm:
        return add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other: QlTerm | GammaVal | int | Fraction) -> QlTerm:
        return sub(self, _lift(other))

    def __rsub__(self, other: QlTerm | GammaVal | int | Fraction) -> QlTerm:
        return sub(_lift(other), self)

    def __mul__(self, factor: int | Fraction) -> QlTerm:
        return scale(self, Fraction(factor))

    __rmul__ = __mul__

    def __neg__(self) -> QlTerm:
        return scale(self, Fraction(-1))


@dataclass(frozen=True, eq=True)
class Const(QlTerm):
    value: GammaVal

    def evaluate(self, assignment: Mapping[Hashable, GammaVal]) -> GammaVal:
        return self.value

    def symbols(self) -> set[ValOf]:
        return set()

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, eq=True)
class ValOf(QlTerm):
    """v(c) for a parameter constant c identified by `key`."""

    key: Hashable
    label: str

    def evaluate(self, assignment: Mapping[Hashable, GammaVal]) -> GammaVal:
        return assignment[self.key]

    def symbols(self) -> set[ValOf]:
        return {self}

    def __str__(self) -> str:
        return f"v({self.label})"


@dataclass(frozen=True, eq=True)
class Lin(QlTerm):
    """const + sum of coefficient * subterm; subterms are ValOf, Min or Max."""

    terms: tuple[tuple[QlTerm, Fraction], ...]
    const: Fraction

    def evaluate(self, assignment: Mapping[Hashable, GammaVal]) -> GammaVal:
        total = GammaVal(self.const)
        for term, coeff in self.terms:
            value = term.evaluate(assignment)
            if value.is_inf:
                if coeff < 0:
                    raise ValueError(f"negative multiple of +inf in {self}")
                return INF
            total = total + value.scale(coeff)
        return total

    def symbols(self) -> set[ValOf]:
        return set().union(*(t.symbols() for t, _ in self.terms))

    def __str__(self) -> str:
        parts = []
        for term, coeff in self.terms:
            if coeff == 1:
                body = str(term)
            elif coeff == -1:
                body = f"-{term}"
            else:
                body = f"{coeff}*{term}"
            parts.append(body)
        if self.const:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True, eq=True)
class Min(QlTerm):
    args: tuple[QlTerm, ...]

    def evaluate(self, assignment: Mapping[Hashable, GammaVal]) -> GammaVal:
        return min(a.evaluate(assignment) for a in self.args)

    def symbols(self) -> set[ValOf]:
        return set().union(*(a.symbols() for a in self.args))

    def __str__(self) -> str:
        return "min(" + ", ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True, eq=True)
class Max(QlTerm):
    args: tuple[QlTerm, ...]

    def evaluate(self, assignment: Mapping[Hashable, GammaVal]) -> GammaVal:
        return max(a.evaluate(assignment) for a in self.args)

    def symbols(self) -> set[ValOf]:
        return set().union(*(a.symbols() for a in self.args))

    def __str__(self) -> str:
        return "max(" + ", ".join(str(a) for a in self.args) + ")"


def const(value: GammaVal | int | Fraction) -> Const:
    if isinstance(value, GammaVal):
        return Const(value)
    return Const(GammaVal(Fraction(value)))


INF_TERM = Const(INF)
ZERO_TERM = const(0)


def _lift(x: QlTerm | GammaVal | int | Fraction) -> QlTerm:
    return x if isinstance(x, QlTerm) else const(x)


def _linear_parts(t: QlTerm) -> tuple[dict[QlTerm, Fraction], Fraction]:
    if isinstance(t, Const):
        return {}, t.value.finite
    if isinstance(t, Lin):
        return dict(t.terms), t.const
    return {t: Fraction(1)}, Fraction(0)


def _build_lin(terms: dict[QlTerm, Fraction], constant: Fraction) -> QlTerm:
    kept = sorted(((t, c) for t, c in terms.items() if c), key=lambda tc: str(tc[0]))
    if not kept:
        return const(constant)
    if len(kept) == 1 and kept[0][1] == 1 and constant == 0:
        return kept[0][0]
    return Lin(terms=tuple(kept), const=constant)


def add(a: QlTerm, b: QlTerm) -> QlTerm:
    if a.is_inf or b.is_inf:
        return INF_TERM
    ta, ca = _linear_parts(a)
    tb, cb = _linear_parts(b)
    for t, c in tb.items():
        ta[t] = ta.get(t, Fraction(0)) + c
    return _build_lin(ta, ca + cb)


def scale(a: QlTerm, factor: Fraction) -> QlTerm:
    if a.is_inf:
        if factor > 0:
            return INF_TERM
        raise ValueError("cannot scale +inf by a non-positive factor")
    if factor == 0:
        return ZERO_TERM
    terms, constant = _linear_parts(a)
    return _build_lin({t: c * factor for t, c in terms.items()}, constant * factor)


def sub(a: QlTerm, b: QlTerm) -> QlTerm:
    if b.is_inf:
        raise ValueError("cannot subtract +inf")
    return add(a, scale(b, Fraction(-1)))


def _flatten(kind: type, args: Iterable[QlTerm]) -> list[QlTerm]:
    out: list[QlTerm] = []
    for a in args:
        if isinstance(a, kind):
            out.extend(a.args)  # type: ignore[attr-defined]
        else:
            out.append(a)
    return out


def tmin(*args: QlTerm) -> QlTerm:
    """Minimum; +inf arguments are dropped, constants folded."""
    items = [a for a in _flatten(Min, args) if not a.is_inf]
    if not items:
        return INF_TERM
    consts = [a for a in items if isinstance(a, Const)]
    rest = [a for a in items if not isinstance(a, Const)]
    if consts:
        rest.append(Const(min(c.value for c in consts)))
    unique = sorted(set(rest), key=str)
    if len(unique) == 1:
        return unique[0]
    return Min(tuple(unique))


def tmax(*args: QlTerm) -> QlTerm:
    """Maximum; any +inf argument makes the result +inf."""
    items = _flatten(Max, args)
    if not items:
        raise ValueError("max of no terms")
    if any(a.is_inf for a in items):
        return INF_TERM
    consts = [a for a in items if isinstance(a, Const)]
    rest = [a for a in items if not isinstance(a, Const)]
    if consts:
        rest.append(Const(max(c.value for c in consts)))
    unique = sorted(set(rest), key=str)
    if len(unique) == 1:
        return unique[0]
    return Max(tuple(unique))


def ground_value(t: QlTerm) -> GammaVal:
    """Value of a constant term."""
    if not isinstance(t, Const):
        raise ValueError(f"term {t} is not ground")
    return t.value
