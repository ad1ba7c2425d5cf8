"""Lark grammar and transformer for formulas and polynomials."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from fractions import Fraction

from lark import Lark, Token, Transformer, Tree, v_args
from lark.exceptions import UnexpectedInput, VisitError
from sympy.polys.rings import PolyElement, PolyRing

from qe.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Rel,
    formula_ring,
    free_symbols,
    symbol_names,
)
from rcvf.errors import FormulaSyntaxError, StrictCoefficientError, UnboundSymbol
from rcvf.ovf_core import KPoly, OvfElem, T
from utils.logger import get_logger

logger = get_logger(__name__)

K_CONSTANT = "t"

GRAMMAR = r"""
    ?start: formula

    ?formula: quantified
            | implication

    quantified: QUANTIFIER NAME "." formula

    ?implication: disjunction
                | disjunction "->" (implication | quantified) -> implies

    ?disjunction: conjunction
                | disjunction "\\/" conjunction -> or_

    ?conjunction: negation
                | conjunction "/\\" negation -> and_

    ?negation: "~" negation -> not_
             | primary

    ?primary: "true" -> true
            | "false" -> false
            | relation
            | "(" formula ")"

    relation: poly REL poly

    ?poly: term
         | poly "+" term -> add
         | poly "-" term -> sub

    ?term: factor
         | term "*" factor -> mul
         | term "/" divisor -> div

    ?divisor: INT -> number
            | "(" poly ")"

    ?factor: power
           | "-" factor -> neg

    ?power: base
          | base "^" INT -> pow

    ?base: INT -> number
         | NAME -> symbol
         | "(" poly ")"

    QUANTIFIER: "exists" | "forall"
    REL: "<<=" | "<=" | ">=" | "!=" | "=" | "<" | ">"
    NAME: /(?!(exists|forall|true|false)\b)[A-Za-z_][A-Za-z0-9_']*/

    %import common.INT
    %import common.WS
    %ignore WS
"""

_parser = Lark(GRAMMAR, start=["start", "poly"], parser="earley", ambiguity="resolve")


@v_args(inline=True)
class _PolyBuilder(Transformer):
    """Turns parse trees into sympy polynomials of a fixed ring."""

    def __init__(self, r: PolyRing, strict: bool = False):
        super().__init__()
        self.ring = r
        self.strict = strict
        self.names = [str(s) for s in r.symbols]

    def number(self, token: Token) -> PolyElement:
        return self.ring(int(token))

    def symbol(self, token: Token) -> PolyElement:
        name = str(token)
        if name == K_CONSTANT:
            if self.strict:
                raise StrictCoefficientError("the constant t is not allowed with integer coefficients")
            return self.ring(T)
        return self.ring.gens[self.names.index(name)]

    def add(self, a: PolyElement, b: PolyElement) -> PolyElement:
        return a + b

    def sub(self, a: PolyElement, b: PolyElement) -> PolyElement:
        return a - b

    def mul(self, a: PolyElement, b: PolyElement) -> PolyElement:
        return a * b

    def neg(self, a: PolyElement) -> PolyElement:
        return -a

    def pow(self, a: PolyElement, exponent: Token) -> PolyElement:
        return a ** int(exponent)

    def div(self, a: PolyElement, b: PolyElement) -> PolyElement:
        if not b.is_ground:
            raise FormulaSyntaxError(f"divisor must be a constant, got {b}")
        divisor = b.get(self.ring.zero_monom, self.ring.domain.zero)
        if not divisor:
            raise FormulaSyntaxError("division by zero")
        if self.strict:
            raise StrictCoefficientError("division is not allowed with integer coefficients")
        return a.quo_ground(divisor)


@v_args(inline=True)
class _FormulaBuilder(_PolyBuilder):
    def true(self) -> Formula:
        return TRUE

    def false(self) -> Formula:
        return FALSE

    def relation(self, lhs: PolyElement, rel: Token, rhs: PolyElement) -> Formula:
        op = str(rel)
        if op == "=":
            return Atom(Rel.EQ, lhs - rhs)
        if op == "!=":
            return Not(Atom(Rel.EQ, lhs - rhs))
        if op == ">":
            return Atom(Rel.GT, lhs - rhs)
        if op == "<":
            return Atom(Rel.GT, rhs - lhs)
        if op == ">=":
            return Atom(Rel.GE, lhs - rhs)
        if op == "<=":
            return Atom(Rel.GE, rhs - lhs)
        return Atom(Rel.DIV, lhs, rhs)

    def not_(self, arg: Formula) -> Formula:
        return Not(arg)

    def and_(self, a: Formula, b: Formula) -> Formula:
        return And((*(a.args if isinstance(a, And) else (a,)), b))

    def or_(self, a: Formula, b: Formula) -> Formula:
        return Or((*(a.args if isinstance(a, Or) else (a,)), b))

    def implies(self, a: Formula, b: Formula) -> Formula:
        return Implies(a, b)

    def quantified(self, quantifier: Token, name: Token, body: Formula) -> Formula:
        var = str(name)
        if var == K_CONSTANT:
            raise FormulaSyntaxError("t is a constant of K and cannot be quantified")
        kind = Exists if str(quantifier) == "exists" else Forall
        return kind(var, body)


def _names(tree: Tree) -> list[str]:
    found = {
        str(tok)
        for tok in tree.scan_values(lambda v: isinstance(v, Token) and v.type == "NAME")
    }
    found.discard(K_CONSTANT)
    return sorted(found)


def _bound_names(tree: Tree) -> list[str]:
    return [
        str(sub.children[1])
        for sub in tree.iter_subtrees()
        if sub.data == "quantified"
    ]


def _syntax_error(text: str, exc: UnexpectedInput) -> FormulaSyntaxError:
    line = getattr(exc, "line", None)
    column = getattr(exc, "column", None)
    try:
        context = exc.get_context(text).rstrip()
    except (AttributeError, IndexError):
        context = text
    return FormulaSyntaxError(f"cannot parse formula: {context}", line=line, column=column)


def _transform(builder: Transformer, tree: Tree) -> object:
    try:
        return builder.transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, (FormulaSyntaxError, StrictCoefficientError)):
            raise exc.orig_exc from None
        raise


def parse_formula(
    text: str,
    parameters: Iterable[str] | None = None,
    strict: bool = False,
) -> Formula:
    """
    Parse a formula.

    When `parameters` is given every free symbol must be declared there.
    Bound variables must differ from free symbols.
    """
    try:
        tree = _parser.parse(text, start="start")
    except UnexpectedInput as exc:
        raise _syntax_error(text, exc) from None
    r = formula_ring(tuple(_names(tree)))
    phi = _transform(_FormulaBuilder(r, strict=strict), tree)
    assert not isinstance(phi, (PolyElement, Tree))

    free = free_symbols(phi)
    clash = free.intersection(_bound_names(tree))
    if clash:
        raise FormulaSyntaxError(f"symbols used both free and bound: {sorted(clash)}")
    if parameters is not None:
        unknown = free - set(parameters)
        if unknown:
            raise UnboundSymbol(f"undeclared symbols: {sorted(unknown)}")
    logger.debug("Parsed formula", free=sorted(free), length=len(text))
    return phi


def parse_polynomials(
    texts: Sequence[str], strict: bool = False
) -> tuple[PolyRing, list[PolyElement]]:
    """Parse polynomials into one shared ring."""
    trees = []
    for text in texts:
        try:
            trees.append(_parser.parse(text, start="poly"))
        except UnexpectedInput as exc:
            raise _syntax_error(text, exc) from None
    names = sorted({n for tree in trees for n in _names(tree)})
    r = formula_ring(tuple(names))
    builder = _PolyBuilder(r, strict=strict)
    polys = []
    for tree in trees:
        p = _transform(builder, tree)
        polys.append(p if isinstance(p, PolyElement) else r(p))
    return r, polys


def to_kpoly(p: PolyElement, variable: str | None = None) -> KPoly:
    """Univariate polynomial over K from a ring element in at most one symbol."""
    names = symbol_names(p)
    if variable is None:
        if len(names) > 1:
            raise UnboundSymbol(f"expected a polynomial in one variable, found {sorted(names)}")
        variable = names.pop() if names else None
    elif names - {variable}:
        raise UnboundSymbol(f"unexpected symbols {sorted(names - {variable})}")
    if variable is None or variable not in [str(s) for s in p.ring.symbols]:
        return KPoly.of([OvfElem(p.get(p.ring.zero_monom, p.ring.domain.zero))])
    i = [str(s) for s in p.ring.symbols].index(variable)
    coeffs: dict[int, OvfElem] = {}
    for monom, c in p.items():
        coeffs[monom[i]] = OvfElem(c)
    top = max(coeffs, default=-1)
    return KPoly.of([coeffs.get(k, OvfElem.of(0)) for k in range(top + 1)])


def parse_kpolys(texts: Sequence[str]) -> list[KPoly]:
    """Ground univariate polynomials sharing one variable name."""
    r, polys = parse_polynomials(texts)
    names = sorted(set().union(*(symbol_names(p) for p in polys)) if polys else set())
    if len(names) > 1:
        raise UnboundSymbol(f"expected one variable, found {names}")
    variable = names[0] if names else None
    return [to_kpoly(p, variable) for p in polys]


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise FormulaSyntaxError(f"not a rational number: {text!r}") from None
