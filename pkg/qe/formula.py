"""
First-order formulas over real closed valued fields.

Atoms compare a polynomial with zero (p = 0, p > 0, p >= 0) or two
polynomials by valuation (p <<= q, i.e. v(p) <= v(q)). Polynomials live in a
sympy ring over K = Q(t) whose generators are every symbol of the formula,
free parameters and bound variables alike.
"""

from __future__ import annotations

import enum
from collections.abc import Hashable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from typing import Any, Union

from sympy.polys.rings import PolyElement, PolyRing, ring

import constants
from rcvf.errors import GuardExceeded
from rcvf.ovf_core import KDOMAIN, OvfElem, ovf_preceq, ovf_sign
from rcvf.qlterm import ValOf

PLACEHOLDER_SYMBOL = "_"


@lru_cache(maxsize=64)
def formula_ring(names: tuple[str, ...]) -> PolyRing:
    """Polynomial ring over K in the given symbols."""
    names = names or (PLACEHOLDER_SYMBOL,)
    r, *_ = ring(",".join(names), KDOMAIN)
    return r


class Rel(str, enum.Enum):
    EQ = "="
    GT = ">"
    GE = ">="
    DIV = "<<="


@dataclass(frozen=True)
class Bool:
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)


@dataclass(frozen=True)
class Atom:
    """lhs rel 0, or lhs <<= rhs for divisibility atoms."""

    rel: Rel
    lhs: PolyElement
    rhs: PolyElement | None = None


@dataclass(frozen=True)
class Not:
    arg: Formula


@dataclass(frozen=True)
class And:
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or:
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Exists:
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall:
    var: str
    body: Formula


@dataclass(frozen=True)
class ValLe:
    """
    Linear constraint on symbolic valuations: sum coeff * v(key) + const <= 0,
    or < 0 when strict. Only used while eliminating; never printed as output.
    """

    terms: tuple[tuple[ValOf, Fraction], ...]
    const: Fraction
    strict: bool = False

    @classmethod
    def of(cls, terms: Mapping[ValOf, Fraction], const: Fraction, strict: bool = False) -> ValLe:
        kept = tuple(sorted(((k, c) for k, c in terms.items() if c), key=lambda kc: str(kc[0])))
        return cls(kept, Fraction(const), strict)

    def negate(self) -> ValLe:
        return ValLe(tuple((k, -c) for k, c in self.terms), -self.const, not self.strict)

    def coefficient(self, key: Hashable) -> Fraction:
        return sum((c for k, c in self.terms if k.key == key), Fraction(0))

    def __str__(self) -> str:
        parts = [f"{c}*{k}" for k, c in self.terms] + [str(self.const)]
        return " + ".join(parts) + (" < 0" if self.strict else " <= 0")


Formula = Union[Bool, Atom, ValLe, Not, And, Or, Implies, Exists, Forall]
Literal = Union[Atom, ValLe, Not]


def conj(*args: Formula) -> Formula:
    return simplify(And(tuple(args)))


def disj(*args: Formula) -> Formula:
    return simplify(Or(tuple(args)))


# Polynomials


def symbol_names(p: PolyElement) -> set[str]:
    """Generators of the ring actually occurring in p."""
    names = set()
    for monom in p.keys():
        for i, e in enumerate(monom):
            if e:
                names.add(str(p.ring.symbols[i]))
    return names


def constant_term(p: PolyElement) -> OvfElem:
    return OvfElem(p.get(p.ring.zero_monom, p.ring.domain.zero))


def gen_index(r: PolyRing, name: str) -> int:
    return [str(s) for s in r.symbols].index(name)


def coefficients_in(p: PolyElement, name: str) -> list[PolyElement]:
    """Coefficients of p as a polynomial in one generator, lowest degree first."""
    r = p.ring
    i = gen_index(r, name)
    out: dict[int, dict] = {}
    for monom, c in p.items():
        rest = monom[:i] + (0,) + monom[i + 1 :]
        out.setdefault(monom[i], {})[rest] = c
    if not out:
        return []
    return [r(out.get(k, {})) for k in range(max(out) + 1)]


def format_poly(p: PolyElement) -> str:
    """Render p in the input grammar."""
    if not p:
        return "0"
    names = [str(s) for s in p.ring.symbols]
    parts: list[str] = []
    for monom, c in p.terms():
        factors = []
        for name, e in zip(names, monom):
            if e == 1:
                factors.append(name)
            elif e:
                factors.append(f"{name}^{e}")
        coef = OvfElem(c)
        negative = False
        if coef.is_rational:
            q = coef.to_rational()
            negative = q < 0
            mag = abs(q)
            text = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if factors and mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([text, *factors])
        else:
            body = "*".join([f"({coef})", *factors])
        if not parts:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(parts)


# Traversal


def atoms(phi: Formula) -> Iterator[Atom]:
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, Not):
        yield from atoms(phi.arg)
    elif isinstance(phi, (And, Or)):
        for a in phi.args:
            yield from atoms(a)
    elif isinstance(phi, Implies):
        yield from atoms(phi.lhs)
        yield from atoms(phi.rhs)
    elif isinstance(phi, (Exists, Forall)):
        yield from atoms(phi.body)


def atom_polys(a: Atom) -> list[PolyElement]:
    return [a.lhs] if a.rhs is None else [a.lhs, a.rhs]


def free_symbols(phi: Formula) -> set[str]:
    """Symbols occurring outside the scope of a binder for them."""
    if isinstance(phi, (Bool, ValLe)):
        return set()
    if isinstance(phi, Atom):
        return set().union(*(symbol_names(p) for p in atom_polys(phi)))
    if isinstance(phi, Not):
        return free_symbols(phi.arg)
    if isinstance(phi, (And, Or)):
        return set().union(*(free_symbols(a) for a in phi.args))
    if isinstance(phi, Implies):
        return free_symbols(phi.lhs) | free_symbols(phi.rhs)
    return free_symbols(phi.body) - {phi.var}


def is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, (Exists, Forall)):
        return False
    if isinstance(phi, Not):
        return is_quantifier_free(phi.arg)
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(a) for a in phi.args)
    if isinstance(phi, Implies):
        return is_quantifier_free(phi.lhs) and is_quantifier_free(phi.rhs)
    return True


def map_atoms(phi: Formula, fn: Any) -> Formula:
    """Rebuild phi with every atom replaced by fn(atom)."""
    if isinstance(phi, Atom):
        return fn(phi)
    if isinstance(phi, (Bool, ValLe)):
        return phi
    if isinstance(phi, Not):
        return Not(map_atoms(phi.arg, fn))
    if isinstance(phi, And):
        return And(tuple(map_atoms(a, fn) for a in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(map_atoms(a, fn) for a in phi.args))
    if isinstance(phi, Implies):
        return Implies(map_atoms(phi.lhs, fn), map_atoms(phi.rhs, fn))
    return type(phi)(phi.var, map_atoms(phi.body, fn))


def instantiate_poly(
    p: PolyElement, values: Mapping[str, OvfElem | int | Fraction], skip: frozenset[str] = frozenset()
) -> PolyElement:
    """Replace the symbols named in `values` (other than `skip`) by elements of K."""
    r = p.ring
    for name, value in values.items():
        if name in skip or name not in symbol_names(p):
            continue
        # PolyElement.subs fails on a zero value
        p = p.compose(r.gens[gen_index(r, name)], r.ground_new(OvfElem.of(value).value))
    return p


def substitute(phi: Formula, values: Mapping[str, OvfElem | int | Fraction]) -> Formula:
    """Instantiate free symbols by elements of K."""

    def go(f: Formula, bound: frozenset[str]) -> Formula:
        if isinstance(f, (Exists, Forall)):
            return type(f)(f.var, go(f.body, bound | {f.var}))
        if isinstance(f, Atom):
            lhs = instantiate_poly(f.lhs, values, bound)
            return Atom(f.rel, lhs, None if f.rhs is None else instantiate_poly(f.rhs, values, bound))
        if isinstance(f, (Bool, ValLe)):
            return f
        if isinstance(f, Not):
            return Not(go(f.arg, bound))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(go(a, bound) for a in f.args))
        return Implies(go(f.lhs, bound), go(f.rhs, bound))

    return go(phi, frozenset())


# Ground evaluation


def evaluate_atom_ground(a: Atom) -> bool:
    """Truth of an atom whose polynomials are constants of K."""
    for p in atom_polys(a):
        if not p.is_ground:
            raise ValueError(f"atom {format_atom(a)} is not ground")
    lhs = constant_term(a.lhs)
    if a.rel is Rel.EQ:
        return lhs.is_zero
    if a.rel is Rel.GT:
        return ovf_sign(lhs) > 0
    if a.rel is Rel.GE:
        return ovf_sign(lhs) >= 0
    assert a.rhs is not None
    return ovf_preceq(lhs, constant_term(a.rhs))


def evaluate_ground(phi: Formula) -> bool:
    """Truth value of a quantifier-free formula without symbols."""
    if isinstance(phi, Bool):
        return phi.value
    if isinstance(phi, ValLe):
        if phi.terms:
            raise ValueError(f"constraint {phi} is not ground")
        return phi.const < 0 if phi.strict else phi.const <= 0
    if isinstance(phi, Atom):
        return evaluate_atom_ground(phi)
    if isinstance(phi, Not):
        return not evaluate_ground(phi.arg)
    if isinstance(phi, And):
        return all(evaluate_ground(a) for a in phi.args)
    if isinstance(phi, Or):
        return any(evaluate_ground(a) for a in phi.args)
    if isinstance(phi, Implies):
        return (not evaluate_ground(phi.lhs)) or evaluate_ground(phi.rhs)
    raise ValueError("evaluate_ground needs a quantifier-free formula")


# Simplification and normal forms


def _normalize_atom(a: Atom) -> Formula:
    if all(p.is_ground for p in atom_polys(a)):
        return Bool(evaluate_atom_ground(a))
    if a.rel is Rel.EQ:
        return Atom(Rel.EQ, a.lhs.monic())
    if a.rel in (Rel.GT, Rel.GE):
        lc = OvfElem(a.lhs.LC)
        scaled = a.lhs.quo_ground(a.lhs.LC) if ovf_sign(lc) > 0 else -a.lhs.quo_ground(a.lhs.LC)
        return Atom(a.rel, scaled)
    assert a.rhs is not None
    if not a.rhs:
        return TRUE
    if a.lhs == a.rhs:
        return TRUE
    return a


def _sort_key(phi: Formula) -> str:
    return format_formula(phi)


def simplify(phi: Formula) -> Formula:
    """
    Syntactic simplification: ground atoms are evaluated, sign atoms scaled
    to a canonical leading coefficient, connectives flattened and
    duplicates removed.
    """
    if isinstance(phi, Bool):
        return phi
    if isinstance(phi, Atom):
        return _normalize_atom(phi)
    if isinstance(phi, ValLe):
        return Bool(evaluate_ground(phi)) if not phi.terms else phi
    if isinstance(phi, Not):
        inner = simplify(phi.arg)
        if isinstance(inner, Bool):
            return Bool(not inner.value)
        if isinstance(inner, Not):
            return inner.arg
        return Not(inner)
    if isinstance(phi, Implies):
        return simplify(Or((Not(phi.lhs), phi.rhs)))
    if isinstance(phi, (And, Or)):
        kind = type(phi)
        unit, zero = (TRUE, FALSE) if kind is And else (FALSE, TRUE)
        items: list[Formula] = []
        for a in phi.args:
            s = simplify(a)
            if s == zero:
                return zero
            if s == unit:
                continue
            items.extend(s.args if isinstance(s, kind) else [s])
        unique = sorted(set(items), key=_sort_key)
        for f in unique:
            if isinstance(f, Not) and f.arg in unique:
                return zero
        if not unique:
            return unit
        if len(unique) == 1:
            return unique[0]
        return kind(tuple(unique))
    return type(phi)(phi.var, simplify(phi.body))


def _negate_literal(a: Atom) -> Formula:
    if a.rel is Rel.GT:
        return Atom(Rel.GE, -a.lhs)
    if a.rel is Rel.GE:
        return Atom(Rel.GT, -a.lhs)
    return Not(a)


def nnf(phi: Formula, negate: bool = False) -> Formula:
    """Negation normal form of a quantifier-free formula."""
    if isinstance(phi, Bool):
        return Bool(phi.value != negate)
    if isinstance(phi, Atom):
        return _negate_literal(phi) if negate else phi
    if isinstance(phi, ValLe):
        return phi.negate() if negate else phi
    if isinstance(phi, Not):
        return nnf(phi.arg, not negate)
    if isinstance(phi, Implies):
        return nnf(Or((Not(phi.lhs), phi.rhs)), negate)
    if isinstance(phi, And):
        kind = Or if negate else And
        return kind(tuple(nnf(a, negate) for a in phi.args))
    if isinstance(phi, Or):
        kind = And if negate else Or
        return kind(tuple(nnf(a, negate) for a in phi.args))
    raise ValueError("nnf needs a quantifier-free formula")


def dnf_clauses(phi: Formula, limit: int | None = None) -> list[tuple[Literal, ...]]:
    """Clauses of a disjunctive normal form; [] is false, [()] is true."""
    limit = constants.DNF_SIZE_LIMIT if limit is None else limit

    def go(f: Formula) -> list[tuple[Literal, ...]]:
        if isinstance(f, Bool):
            return [()] if f.value else []
        if isinstance(f, (Atom, ValLe, Not)):
            return [(f,)]
        if isinstance(f, Or):
            out = [c for a in f.args for c in go(a)]
        else:
            assert isinstance(f, And)
            parts = [go(a) for a in f.args]
            size = reduce(lambda acc, p: acc * len(p), parts, 1)
            if size > limit:
                raise GuardExceeded(f"normal form would have {size} clauses (limit {limit})")
            out = [tuple(lit for clause in combo for lit in clause) for combo in product(*parts)]
        if len(out) > limit:
            raise GuardExceeded(f"normal form has {len(out)} clauses (limit {limit})")
        return out

    clauses = []
    for clause in go(nnf(simplify(phi))):
        unique = tuple(sorted(set(clause), key=_sort_key))
        if unique not in clauses:
            clauses.append(unique)
    return clauses


def to_dnf(phi: Formula, limit: int | None = None) -> Formula:
    return simplify(Or(tuple(And(c) for c in dnf_clauses(phi, limit))))


# Output


def format_atom(a: Atom) -> str:
    if a.rel is Rel.DIV:
        assert a.rhs is not None
        return f"{_paren(a.lhs)} <<= {_paren(a.rhs)}"
    return f"{format_poly(a.lhs)} {a.rel.value} 0"


def _paren(p: PolyElement) -> str:
    text = format_poly(p)
    return text if len(p) <= 1 and not text.startswith("-") else f"({text})"


def format_formula(phi: Formula) -> str:
    """Render phi in the input grammar."""
    if isinstance(phi, Bool):
        return "true" if phi.value else "false"
    if isinstance(phi, Atom):
        return format_atom(phi)
    if isinstance(phi, ValLe):
        return str(phi)
    if isinstance(phi, Not):
        return f"~({format_formula(phi.arg)})"
    if isinstance(phi, And):
        return " /\\ ".join(_wrap(a) for a in phi.args)
    if isinstance(phi, Or):
        return " \\/ ".join(_wrap(a) for a in phi.args)
    if isinstance(phi, Implies):
        return f"{_wrap(phi.lhs)} -> {_wrap(phi.rhs)}"
    keyword = "exists" if isinstance(phi, Exists) else "forall"
    return f"{keyword} {phi.var}. {format_formula(phi.body)}"


def _wrap(phi: Formula) -> str:
    text = format_formula(phi)
    return text if isinstance(phi, (Bool, Atom, ValLe, Not)) else f"({text})"


def to_json(phi: Formula) -> dict[str, Any]:
    """JSON-ready AST."""
    if isinstance(phi, Bool):
        return {"op": "true" if phi.value else "false"}
    if isinstance(phi, ValLe):
        return {"op": "valuation_constraint", "text": str(phi)}
    if isinstance(phi, Atom):
        out = {"op": "atom", "rel": phi.rel.value, "lhs": format_poly(phi.lhs)}
        if phi.rhs is not None:
            out["rhs"] = format_poly(phi.rhs)
        return out
    if isinstance(phi, Not):
        return {"op": "not", "arg": to_json(phi.arg)}
    if isinstance(phi, (And, Or)):
        return {"op": type(phi).__name__.lower(), "args": [to_json(a) for a in phi.args]}
    if isinstance(phi, Implies):
        return {"op": "implies", "lhs": to_json(phi.lhs), "rhs": to_json(phi.rhs)}
    return {"op": type(phi).__name__.lower(), "var": phi.var, "body": to_json(phi.body)}


def sign_atom(p: PolyElement, sign: int) -> Formula:
    """Formula stating sign(p) = sign."""
    if sign == 0:
        return Atom(Rel.EQ, p)
    return Atom(Rel.GT, p if sign > 0 else -p)


def monomial_atom(lhs: Sequence[tuple[PolyElement, int]], rhs: Sequence[tuple[PolyElement, int]], r: PolyRing) -> Atom:
    """prod c^e <<= prod d^f."""

    def build(factors: Sequence[tuple[PolyElement, int]]) -> PolyElement:
        out = r.one
        for base, e in factors:
            out = out * base**e
        return out

    return Atom(Rel.DIV, build(lhs), build(rhs))
