"""
Numeric cross-check of symbolic results.

Every polynomial is specialized at t = t0 = 2^-e for the configured exponents
and the real roots of the whole family are isolated exactly over Q with
sympy in one pass, then refined only as far as each checked quantity needs. Valuations are
estimated as slopes of log|value| against log(t0) between two exponents (or
as the plain log ratio when only one exponent is configured).
"""

import math
import random
from collections.abc import Callable, Sequence
from fractions import Fraction

from sympy import QQ, Poly, Rational, Symbol, intervals

import constants
from models.results import OracleCheck, OracleReport, gamma_text
from rcvf.errors import InconsistentInput, SpecializationPole
from rcvf.newton import root_valuations
from rcvf.ovf_core import GammaVal, KPoly, OvfElem, Sign
from rcvf.rcvf_algorithms import VscTableau, rcvf1_valuation, rcvf2_tableau
from rcvf.tableau import SignTableau, ThomCode, locate_code, tableau_of
from utils.logger import get_logger, log_oracle_verdict

logger = get_logger(__name__)

_X = Symbol("X")
MAX_REFINEMENTS = 200


def _log(q: Fraction) -> float:
    q = abs(q)
    return math.log(q.numerator) - math.log(q.denominator)


def specialize(p: KPoly, t0: Fraction) -> list[Fraction]:
    """Coefficients of p at t = t0, degree 0 first."""
    try:
        return [c.specialize(t0) for c in p.coeffs]
    except ZeroDivisionError as exc:
        raise SpecializationPole(str(exc)) from None


def _evaluate(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _sympy_poly(coeffs: Sequence[Fraction]) -> Poly:
    return Poly.from_list(
        [Rational(c.numerator, c.denominator) for c in reversed(coeffs)], _X, domain=QQ
    )


def _fraction(r: Rational) -> Fraction:
    return Fraction(int(r.p), int(r.q))


def _rational(q: Fraction) -> Rational:
    return Rational(q.numerator, q.denominator)


def _sign(q: Fraction) -> Sign:
    return (q > 0) - (q < 0)


def _refiner(coeffs: Sequence[Fraction], nonzero_root: bool) -> Poly:
    poly = _sympy_poly(coeffs).sqf_part()
    if nonzero_root and poly.eval(0) == 0:
        poly = poly.exquo(Poly(_X, _X, domain=QQ))
    return poly


class NumericTableau:
    """
    Real roots of a family specialized at t0, isolated exactly over Q.

    Isolating intervals are refined lazily, only as far as the requested
    quantity (root, gap or member value) needs to reach the relative
    accuracy 2 ** -precision.
    """

    def __init__(
        self,
        t0: Fraction,
        members: Sequence[Sequence[Fraction]],
        roots: Sequence[tuple[tuple[Fraction, Fraction], Sequence[int]]],
        precision: int,
    ):
        self.t0 = t0
        self.members = tuple(tuple(c) for c in members)
        self.accuracy = Fraction(1, 2**precision)
        self._intervals = [interval for interval, _ in roots]
        # squarefree part of the lowest degree member vanishing at each root,
        # without the factor X away from zero so no root sits on an endpoint
        self._refiners = [
            _refiner(min((self.members[j] for j in vanishing), key=len), interval != (0, 0))
            for interval, vanishing in roots
        ]
        # the zero root is reported as [0, 0] and may touch a positive root's interval
        for k in range(len(roots) - 1):
            for _ in range(MAX_REFINEMENTS):
                if self._intervals[k][1] < self._intervals[k + 1][0]:
                    break
                if not any([self._refine(k), self._refine(k + 1)]):
                    break
        samples = [self.root_estimate(k) for k in range(len(roots))]
        self.point_signs = tuple(
            tuple(
                0 if j in vanishing else _sign(_evaluate(coeffs, x))
                for (_, vanishing), x in zip(roots, samples)
            )
            for j, coeffs in enumerate(self.members)
        )
        between = _interval_samples(self._intervals)
        self.interval_signs = tuple(
            tuple(_sign(_evaluate(coeffs, x)) for x in between) for coeffs in self.members
        )

    @property
    def intervals(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(self._intervals)

    def root_estimate(self, k: int) -> Fraction:
        a, b = self._intervals[k]
        return (a + b) / 2

    def _refine(self, k: int) -> bool:
        a, b = self._intervals[k]
        if a == b:
            return False
        s, u = self._refiners[k].refine_root(_rational(a), _rational(b), eps=_rational((b - a) / 4))
        self._intervals[k] = (_fraction(s), _fraction(u))
        return True

    def _close(self, lo: Fraction, hi: Fraction) -> bool:
        """lo and hi share a sign and agree to the relative accuracy."""
        if lo == hi:
            return True
        if _sign(lo) * _sign(hi) <= 0:
            return False
        small, large = sorted((abs(lo), abs(hi)))
        return large <= small * (1 + self.accuracy)

    def _refine_until(self, k: int, done: Callable[[Fraction, Fraction], bool]) -> None:
        for _ in range(MAX_REFINEMENTS):
            a, b = self._intervals[k]
            if done(a, b) or not self._refine(k):
                return

    def root(self, k: int) -> Fraction:
        """Root k to relative accuracy."""
        self._refine_until(k, self._close)
        return self.root_estimate(k)

    def value(self, j: int, k: int) -> Fraction:
        """Member j at root k to relative accuracy; exactly 0 where it vanishes."""
        if self.point_signs[j][k] == 0:
            return Fraction(0)
        coeffs = self.members[j]
        self._refine_until(k, lambda a, b: self._close(_evaluate(coeffs, a), _evaluate(coeffs, b)))
        return _evaluate(coeffs, self.root_estimate(k))

    def gap(self, k: int) -> Fraction:
        """Distance from root k to root k + 1 to relative accuracy."""
        for _ in range(MAX_REFINEMENTS):
            (a0, b0), (a1, b1) = self._intervals[k], self._intervals[k + 1]
            bound = (a1 - b0) * self.accuracy
            wide = [i for i, w in ((k, b0 - a0), (k + 1, b1 - a1)) if w > bound]
            if not wide or not any([self._refine(i) for i in wide]):
                break
        return self.root_estimate(k + 1) - self.root_estimate(k)


def numeric_tableau(polys: Sequence[KPoly], t0: Fraction, precision: int | None = None) -> NumericTableau:
    precision = constants.ORACLE_PRECISION_EXPONENT if precision is None else precision
    members = [specialize(p, t0) for p in polys]
    varying = [j for j, coeffs in enumerate(members) if len(coeffs) > 1]
    found = intervals([_sympy_poly(members[j]) for j in varying], strict=True) if varying else []
    roots = sorted(
        (((_fraction(a), _fraction(b)), sorted(varying[i] for i in indices)) for (a, b), indices in found),
        key=lambda root: root[0],
    )
    return NumericTableau(t0, members, roots, precision)


def _interval_samples(intervals: Sequence[tuple[Fraction, Fraction]]) -> list[Fraction]:
    if not intervals:
        return [Fraction(0)]
    out = [intervals[0][0] - 1]
    for (_, b), (a, _) in zip(intervals, intervals[1:]):
        out.append((b + a) / 2)
    out.append(intervals[-1][1] + 1)
    return out


def _with_retry(exponent: int, build: Callable[[Fraction], NumericTableau]) -> tuple[int, NumericTableau]:
    e = exponent
    while True:
        try:
            return e, build(Fraction(1, 2**e))
        except SpecializationPole:
            e *= 2
            if e > constants.ORACLE_MAX_T0_EXPONENT:
                raise
            logger.debug("Retrying specialization", exponent=e)


def _estimate(values: Sequence[tuple[Fraction, Fraction]]) -> float:
    """Valuation estimate from (t0, |value|) pairs."""
    if len(values) == 1:
        t0, y = values[0]
        return _log(y) / _log(t0)
    (t1, y1), (t2, y2) = values[0], values[-1]
    return (_log(y1) - _log(y2)) / (_log(t1) - _log(t2))


def _valuation_check(
    quantity: str, symbolic: GammaVal, samples: Sequence[tuple[int, Fraction, Fraction]]
) -> OracleCheck:
    estimates = {str(e): f"{_log(y) / _log(t0):.6f}" for e, t0, y in samples if y}
    if symbolic.is_inf:
        ok = all(y == 0 for _, _, y in samples)
        return OracleCheck(quantity=quantity, symbolic="inf", estimates=estimates, verdict=ok)
    if any(y == 0 for _, _, y in samples):
        return OracleCheck(quantity=quantity, symbolic=gamma_text(symbolic), estimates=estimates, verdict=False)
    estimate = _estimate([(t0, y) for _, t0, y in samples])
    deviation = abs(estimate - float(symbolic.finite))
    return OracleCheck(
        quantity=quantity,
        symbolic=gamma_text(symbolic),
        estimates=estimates,
        deviation=deviation,
        verdict=deviation <= constants.ORACLE_TOLERANCE,
    )


def _numeric_family(polys: Sequence[KPoly], exponents: Sequence[int]) -> list[tuple[int, NumericTableau]]:
    return [_with_retry(e, lambda t0: numeric_tableau(polys, t0)) for e in exponents]


def _sign_checks(base: SignTableau, numeric: Sequence[tuple[int, NumericTableau]]) -> list[OracleCheck]:
    checks = []
    symbolic = f"{len(base.roots)} roots"
    for e, nt in numeric:
        same = (
            len(nt.intervals) == len(base.roots)
            and nt.point_signs == base.point_signs
            and nt.interval_signs == base.interval_signs
        )
        checks.append(
            OracleCheck(
                quantity=f"sign matrix at t0=2^-{e}",
                symbolic=symbolic,
                estimates={str(e): f"{len(nt.intervals)} roots"},
                verdict=same,
            )
        )
    return checks


def _report(task: str, exponents: Sequence[int], checks: list[OracleCheck]) -> OracleReport:
    report = OracleReport(
        task=task,
        t0_exponents=list(exponents),
        checks=checks,
        passed=all(c.verdict for c in checks),
    )
    log_oracle_verdict(
        logger, len(checks), [c.quantity for c in report.failures], list(exponents)
    )
    return report


def _deviation(check: OracleCheck) -> float:
    return math.inf if check.deviation is None else check.deviation


def check_root_valuations(p: KPoly, exponents: Sequence[int] | None = None) -> OracleReport:
    """Every real root's estimated valuation is one of the Newton polygon valuations."""
    exponents = list(exponents or constants.ORACLE_T0_EXPONENTS)
    stripped, _ = p.strip_zero_roots()
    expected = root_valuations(stripped)
    numeric = _numeric_family([stripped], exponents)
    counts = {len(nt.intervals) for _, nt in numeric}
    checks = []
    if len(counts) != 1:
        checks.append(
            OracleCheck(quantity="real root count", symbolic="stable", verdict=False)
        )
        return _report("newton", exponents, checks)
    remaining = {v: m for v, m in expected.entries}
    for k in range(counts.pop()):
        samples = [(e, nt.t0, abs(nt.root(k))) for e, nt in numeric]
        best: OracleCheck | None = None
        for v in remaining:
            if v.is_inf or remaining[v] == 0:
                continue
            check = _valuation_check(f"real root {k}", v, samples)
            if best is None or _deviation(check) < _deviation(best):
                best = check
        if best is None:
            best = OracleCheck(quantity=f"real root {k}", symbolic="none left", verdict=False)
        else:
            remaining[GammaVal.of(best.symbolic)] -= 1
        checks.append(best)
    return _report("newton", exponents, checks)


def check_valuation_of_root(code: ThomCode, exponents: Sequence[int] | None = None) -> OracleReport:
    exponents = list(exponents or constants.ORACLE_T0_EXPONENTS)
    tableau = tableau_of([code.poly])
    k = locate_code(tableau, code)
    numeric = _numeric_family(tableau.polys, exponents)
    checks = _sign_checks(tableau, numeric)
    if all(c.verdict for c in checks):
        value = rcvf1_valuation(code).value
        samples = [(e, nt.t0, abs(nt.root(k))) for e, nt in numeric]
        checks.append(_valuation_check(f"v(x) for {code}", value, samples))
    return _report("val-of-root", exponents, checks)


def check_tableau(polys: Sequence[KPoly], exponents: Sequence[int] | None = None) -> OracleReport:
    exponents = list(exponents or constants.ORACLE_T0_EXPONENTS)
    tableau = tableau_of(polys)
    return _report("tableau", exponents, _sign_checks(tableau, _numeric_family(tableau.polys, exponents)))


def check_vsc(vsc: VscTableau, exponents: Sequence[int] | None = None) -> OracleReport:
    """Sign matrices plus every root and gap valuation of a computed tableau."""
    exponents = list(exponents or constants.ORACLE_T0_EXPONENTS)
    numeric = _numeric_family(vsc.polys, exponents)
    checks = _sign_checks(vsc.base, numeric)
    if not all(c.verdict for c in checks):
        return _report("vsc-tableau", exponents, checks)
    for j, row in enumerate(vsc.root_vals):
        for k, value in enumerate(row):
            samples = [
                (e, nt.t0, abs(nt.value(j, k))) for e, nt in numeric
            ]
            if value.is_inf:
                checks.append(
                    OracleCheck(
                        quantity=f"v(F{j}(x{k}))",
                        symbolic="inf",
                        verdict=all(nt.point_signs[j][k] == 0 for _, nt in numeric),
                    )
                )
            else:
                checks.append(_valuation_check(f"v(F{j}(x{k}))", value, samples))
    for k, value in enumerate(vsc.gap_vals):
        samples = [(e, nt.t0, abs(nt.gap(k))) for e, nt in numeric]
        checks.append(_valuation_check(f"v(x{k + 1} - x{k})", value, samples))
    return _report("vsc-tableau", exponents, checks)


def run_oracle(
    task: str,
    polys: Sequence[KPoly] = (),
    code: ThomCode | None = None,
    exponents: Sequence[int] | None = None,
) -> OracleReport:
    """Dispatch a cross-check by command name."""
    if task == "newton":
        if len(polys) != 1:
            raise InconsistentInput("newton check takes one polynomial")
        return check_root_valuations(polys[0], exponents)
    if task == "val-of-root":
        if code is None:
            raise InconsistentInput("val-of-root check needs a Thom code")
        return check_valuation_of_root(code, exponents)
    if task == "tableau":
        return check_tableau(polys, exponents)
    if task == "vsc-tableau":
        return check_vsc(rcvf2_tableau(polys), exponents)
    raise InconsistentInput(f"no numeric check for {task!r}")


def random_kpoly(rng: random.Random, max_degree: int = 4, valuation_range: int = 3) -> KPoly:
    """Random polynomial with coefficients c * t^e, e in [-valuation_range, valuation_range]."""
    degree = rng.randint(1, max_degree)
    coeffs = []
    for k in range(degree + 1):
        if k < degree and rng.random() < 0.25:
            coeffs.append(OvfElem.of(0))
            continue
        c = rng.choice([-5, -4, -3, -2, -1, 1, 2, 3, 4, 5])
        coeffs.append(OvfElem.t(rng.randint(-valuation_range, valuation_range)) * c)
    return KPoly.of(coeffs)
