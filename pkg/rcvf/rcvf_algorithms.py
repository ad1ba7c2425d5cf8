"""
Valuations of Thom-coded roots and complete tableaux of valued sign conditions.

rcvf1_valuation finds v(x) for a single coded root through Newton polygon
candidates, a Tschirnhaus transform and a residue-field Thom code test.
rcvf2_tableau replays the Cohen-Hörmander induction and attaches the
valuation of every member at every point plus the gaps between consecutive
points, solving the generalized Taylor min-equations for each new root.
"""

from __future__ import annotations

import enum
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from rcvf.errors import (
    InternalInvariantViolated,
    InvalidCode,
    NoFiniteTerm,
    RNotInvertible,
)
from rcvf.gtf import Endpoint, build_gtf, gtf_slopes
from rcvf.newton import root_valuations
from rcvf.ovf_core import (
    ZERO_VAL,
    GammaVal,
    KPoly,
    OvfElem,
    Sign,
    ovf_residue,
    ovf_val,
    tschirnhaus_charpoly,
    tschirnhaus_rational,
    tschirnhaus_ring,
)
from rcvf.qlterm import (
    INF_TERM,
    ZERO_TERM,
    QlTerm,
    const,
    ground_value,
    tmax,
    tmin,
)
from rcvf.tableau import (
    FamilyShape,
    SignMatrix,
    SignTableau,
    ThomCode,
    close_family,
    locate_code,
    sign_at_code,
    sign_tableau,
    tableau_of,
)
from utils.logger import get_logger, log_stage_completion, log_stage_start

logger = get_logger(__name__)


@dataclass(frozen=True)
class RationalValuation:
    """n * v(x) = v(a)."""

    n: int
    a: OvfElem

    @property
    def value(self) -> GammaVal:
        return ovf_val(self.a).scale(Fraction(1, self.n))


def solve_tau(
    nu: GammaVal, mus: Sequence[GammaVal], ks: Sequence[int]
) -> GammaVal:
    """max_j (nu - mu_j) / k_j over the finite mu_j."""
    if nu.is_inf:
        raise NoFiniteTerm("nu must be finite")
    candidates = [
        (nu - mu).scale(Fraction(1, k)) for mu, k in zip(mus, ks) if not mu.is_inf
    ]
    if not candidates:
        raise NoFiniteTerm("every mu is +inf")
    return max(candidates)


def _ql_solve_tau(nu: QlTerm, mus: Sequence[QlTerm], ks: Sequence[int]) -> QlTerm:
    if nu.is_inf:
        raise InternalInvariantViolated("value at a sign-changing endpoint is +inf")
    candidates = [(nu - mu) * Fraction(1, k) for mu, k in zip(mus, ks) if not mu.is_inf]
    if not candidates:
        raise NoFiniteTerm("every term of the min-equation is +inf")
    return tmax(*candidates)


# RCVF1


def rcvf1_valuation(code: ThomCode) -> RationalValuation:
    """Valuation of the root coded by (P, sigma)."""
    tableau = tableau_of([code.poly, KPoly.x()])
    k = locate_code(tableau, code)
    s = tableau.point_signs[tableau.family.index(KPoly.x())][k]
    if s == 0:
        return RationalValuation(n=1, a=OvfElem.of(0))

    p, _ = code.poly.strip_zero_roots()
    candidates = sorted(
        {v.finite for v, _ in root_valuations(p).entries if not v.is_inf}
    )
    n = lcm(*(v.denominator for v in candidates))
    b = [OvfElem.t(int(v * n)) for v in candidates]
    signed_x = KPoly.of([0, s])

    def compare(j: int) -> Sign:
        """sign(|x|^n - b_j)."""
        return sign_at_code(signed_x**n - KPoly.constant(b[j]), code)

    r = len(b)
    logger.debug("RCVF1 candidates", candidates=[str(v) for v in candidates], n=n)
    if r == 1 or compare(0) >= 0:
        return RationalValuation(n=n, a=b[0])
    if compare(r - 1) <= 0:
        return RationalValuation(n=n, a=b[r - 1])
    for j in range(r - 1):
        upper, lower = compare(j), compare(j + 1)
        if upper == 0:
            return RationalValuation(n=n, a=b[j])
        if lower == 0:
            return RationalValuation(n=n, a=b[j + 1])
        if upper < 0 < lower:
            unit = _is_unit_ratio(code, p, s, n, b, j)
            return RationalValuation(n=n, a=b[j] if unit else b[j + 1])
    raise InternalInvariantViolated("x^n not located among the candidates")


def _is_unit_ratio(
    code: ThomCode, p: KPoly, s: Sign, n: int, b: list[OvfElem], j: int
) -> bool:
    """Whether v(|x|^n) = v(b_j), decided through the residue of y / (1 + c y^2)."""
    _, (y,) = tschirnhaus_ring(1)
    if s < 0:
        p = p.mirror() * (-1) ** p.degree
    c0 = b[j] / b[j - 1] if j > 0 else b[1] / b[0]
    numerator = y**n * b[j].value
    for attempt in range(1, 16):
        c = c0 * attempt
        denominator = y ** (2 * n) * c.value + (b[j] * b[j]).value
        try:
            r = tschirnhaus_rational([p], numerator, denominator)
            break
        except RNotInvertible:
            continue
    else:
        raise InternalInvariantViolated("no invertible change of variable found")

    if any(ovf_val(coef) < ZERO_VAL for coef in r.coeffs):
        raise InternalInvariantViolated(f"transformed polynomial not over V: {r}")
    residue = KPoly.of([ovf_residue(coef) for coef in r.coeffs])

    # code of phi(z / b_j) as a root of R: signs of D^m R^(k)(N / D) at x
    x_n = KPoly.of([0, s]) ** n
    num_x = x_n * b[j]
    den_x = KPoly.of([b[j] * b[j]]) + (x_n * x_n) * c
    sigma = []
    for k in range(1, r.degree):
        rk = r.derivative(k)
        m = rk.degree
        cleared = KPoly.of([])
        for i, coef in enumerate(rk.coeffs):
            cleared = cleared + (num_x**i) * (den_x ** (m - i)) * coef
        sigma.append(sign_at_code(cleared, code))

    if not residue.evaluate(0).is_zero:
        return True
    for k, sk in enumerate(sigma, start=1):
        value = residue.derivative(k).evaluate(0)
        actual = 0 if value.is_zero else (1 if value.to_rational() > 0 else -1)
        if (sk == 0 and actual != 0) or sk * actual < 0:
            return True
    return False


# RCVF2


class LocalVariable(str, enum.Enum):
    TAU1 = "tau1"
    TAU2 = "tau2"
    TAU = "tau"
    NONE = "none"


@dataclass(frozen=True)
class IntervalPlv:
    """
    v(F_j(x)) on an open interval as min over pieces of offset + slope * var.

    For a bounded interval var is tau1 (x close to the left point) or tau2
    (x close to the right point) and the other scale is 0. For an unbounded
    interval var is tau = v(x - anchor).
    """

    pieces: tuple[tuple[QlTerm, int], ...]
    variable: LocalVariable

    def at(self, tau: QlTerm, variable: LocalVariable) -> QlTerm:
        """Value when `variable` equals tau and every other scale is 0."""
        active = self.variable == variable
        return tmin(
            *(
                offset + (tau * slope if active and slope else ZERO_TERM)
                for offset, slope in self.pieces
            )
        )

    def on_side(self, variable: LocalVariable) -> tuple[tuple[QlTerm, int], ...]:
        """Affine pieces in the given local variable."""
        if self.variable == variable:
            return self.pieces
        return tuple((offset, 0) for offset, _ in self.pieces)


class ValuationReplay:
    """
    Replay of the induction with valuations attached.

    Values are Q-semilinear terms; in ground mode every term folds to a
    constant. `const_vals` gives the value of each constant member and
    `lead_vals` the value of the leading coefficient of each member.
    """

    def __init__(
        self,
        shape: FamilyShape,
        matrix: SignMatrix,
        const_vals: Mapping[int, QlTerm],
        remainder_shift_vals: Mapping[int, QlTerm] | None = None,
    ):
        self.shape = shape
        self.matrix = matrix
        self.const_vals = dict(const_vals)
        self.shift_vals = dict(remainder_shift_vals or {})
        self.values: dict[tuple[int, int], QlTerm] = {}
        self.gaps: dict[tuple[int, int], QlTerm] = {}
        self._chains = {
            j: shape.derivative_chain(j) for j in range(len(shape)) if shape.degrees[j] > 0
        }
        self._run()

    def value(self, j: int, pid: int) -> QlTerm:
        if self.shape.degrees[j] <= 0:
            return self.const_vals[j]
        return self.values[(j, pid)]

    def _interval_sign(self, j: int, left: int | None) -> Sign:
        k = 0 if left is None else self.matrix.position(left) + 1
        return self.matrix.interval_signs[j][k]

    def member_plv(
        self, j: int, left: int | None, right: int | None, delta: QlTerm | None
    ) -> IntervalPlv:
        """Valuation of member j on the open interval between two points."""
        if self.shape.degrees[j] <= 0:
            return IntervalPlv(((self.const_vals[j], 0),), LocalVariable.NONE)
        chain = self._chains[j]
        d = self.shape.degrees[j]
        if left is not None and right is not None:
            assert delta is not None
            s0 = self._interval_sign(j, left)
            eps = tuple(s0 * self._interval_sign(c, left) for c in chain)
            identity = build_gtf(d, eps)
            slopes = gtf_slopes(identity)
            at = {Endpoint.A: left, Endpoint.B: right}
            pieces = [(self.value(j, at[identity.endpoints[0]]), 0)]
            for i in range(1, d + 1):
                pid = at[identity.endpoints[i]] if i < d else left
                pieces.append(
                    (self.value(chain[i - 1], pid) + delta * i, slopes[i - 1])
                )
            var = LocalVariable.TAU1 if eps[0] == 1 else LocalVariable.TAU2
        elif left is not None or right is not None:
            anchor = left if left is not None else right
            assert anchor is not None
            pieces = [(self.value(j, anchor), 0)]
            pieces += [(self.value(c, anchor), i) for i, c in enumerate(chain, start=1)]
            var = LocalVariable.TAU
        else:
            raise InternalInvariantViolated(f"nonconstant member {j} without points")
        kept = tuple((o, s) for o, s in pieces if not o.is_inf)
        return IntervalPlv(kept, var)

    def _run(self) -> None:
        shape, matrix = self.shape, self.matrix
        by_member: dict[int, list] = {}
        for ins in matrix.history:
            by_member.setdefault(ins.member, []).append(ins)
        current: list[int] = []

        for m in range(len(shape)):
            if shape.degrees[m] <= 0:
                continue
            for pid in current:
                owner = matrix.owners[pid]
                link = shape.remainders[(m, owner)]
                if link.target is None:
                    self.values[(m, pid)] = INF_TERM
                    continue
                v = self.value(link.target, pid)
                if link.shift:
                    v = v - self.shift_vals[owner] * link.shift
                self.values[(m, pid)] = v
            for ins in by_member.get(m, []):
                self._insert(m, ins.point, ins.left, ins.right)
                if ins.left is None:
                    current.insert(0, ins.point)
                else:
                    current.insert(current.index(ins.left) + 1, ins.point)

    def _insert(self, m: int, x: int, a: int | None, b: int | None) -> None:
        chain = self._chains[m]
        d = self.shape.degrees[m]
        self.values[(m, x)] = INF_TERM
        if a is None and b is None:
            return

        if a is not None and b is not None:
            delta = self.gaps.pop((a, b))
            s0 = self._interval_sign(m, a)
            eps = tuple(-s0 * self._interval_sign(c, a) for c in chain)
            tau1 = self._solve_side(m, chain, d, eps, a, b, delta)
            tau2 = self._solve_side(m, chain, d, tuple(-e for e in eps), a, b, delta)
            if tau1.is_const and tau2.is_const:
                t1, t2 = ground_value(tau1), ground_value(tau2)
                if t1 < ZERO_VAL or t2 < ZERO_VAL or min(t1, t2) != ZERO_VAL:
                    raise InternalInvariantViolated(
                        f"inconsistent scales tau1={t1}, tau2={t2} for member {m}"
                    )
            self.gaps[(a, x)] = delta + tau1
            self.gaps[(x, b)] = delta + tau2
            for j in range(m):
                if self.shape.degrees[j] <= 0:
                    continue
                plv = self.member_plv(j, a, b, delta)
                if plv.variable == LocalVariable.TAU1:
                    self.values[(j, x)] = plv.at(tau1, LocalVariable.TAU1)
                else:
                    self.values[(j, x)] = plv.at(tau2, LocalVariable.TAU2)
            return

        anchor = a if a is not None else b
        assert anchor is not None
        nu = self.value(m, anchor)
        nus = [self.value(c, anchor) for c in chain]
        tau = _ql_solve_tau(nu, nus, range(1, d + 1))
        if a is not None:
            self.gaps[(a, x)] = tau
        else:
            self.gaps[(x, anchor)] = tau
        for j in range(m):
            if self.shape.degrees[j] <= 0:
                continue
            plv = self.member_plv(j, a, b, None)
            self.values[(j, x)] = plv.at(tau, LocalVariable.TAU)

    def _solve_side(
        self,
        m: int,
        chain: list[int],
        d: int,
        eps: tuple[int, ...],
        a: int,
        b: int,
        delta: QlTerm,
    ) -> QlTerm:
        identity = build_gtf(d, eps)
        slopes = gtf_slopes(identity)
        at = {Endpoint.A: a, Endpoint.B: b}
        nu = self.value(m, at[identity.endpoints[0]])
        mus = []
        for i in range(1, d + 1):
            pid = at[identity.endpoints[i]] if i < d else a
            mus.append(self.value(chain[i - 1], pid) + delta * i)
        return _ql_solve_tau(nu, mus, slopes)

    def final_gaps(self) -> list[QlTerm]:
        order = self.matrix.order
        return [self.gaps[(order[k], order[k + 1])] for k in range(len(order) - 1)]

    def final_intervals(self) -> list[list[IntervalPlv]]:
        """IntervalPlv for every member on every final interval."""
        order = self.matrix.order
        gaps = self.final_gaps()
        out = []
        for j in range(len(self.shape)):
            row = []
            for k in range(len(order) + 1):
                left = order[k - 1] if k > 0 else None
                right = order[k] if k < len(order) else None
                delta = gaps[k - 1] if 0 < k < len(order) else None
                row.append(self.member_plv(j, left, right, delta))
            out.append(row)
        return out


@dataclass(frozen=True)
class VscTableau:
    """Complete tableau of valued sign conditions."""

    base: SignTableau
    root_vals: tuple[tuple[GammaVal, ...], ...]
    gap_vals: tuple[GammaVal, ...]
    intervals: tuple[tuple[IntervalPlv, ...], ...] = field(compare=False, repr=False)

    @property
    def polys(self) -> tuple[KPoly, ...]:
        return self.base.polys


def rcvf2_tableau(polys: Sequence[KPoly]) -> VscTableau:
    """Complete tableau of valued sign conditions of the closure of `polys`."""
    started = time.monotonic()
    log_stage_start(logger, "rcvf2", inputs=len(polys))
    family = close_family(polys)
    base = sign_tableau(family)
    const_vals = {
        j: const(ovf_val(p.coeff(0))) for j, p in enumerate(family.polys) if p.degree <= 0
    }
    replay = ValuationReplay(family.shape(), base.matrix, const_vals)
    order = base.matrix.order
    root_vals = tuple(
        tuple(ground_value(replay.value(j, pid)) for pid in order)
        for j in range(len(family.polys))
    )
    gap_vals = tuple(ground_value(g) for g in replay.final_gaps())
    intervals = tuple(tuple(row) for row in replay.final_intervals())
    log_stage_completion(
        logger,
        "rcvf2",
        time.monotonic() - started,
        members=len(family.polys),
        points=len(order),
    )
    return VscTableau(base=base, root_vals=root_vals, gap_vals=gap_vals, intervals=intervals)


def valuations_in_interval(
    vsc: VscTableau, k: int, variable: LocalVariable, tau: Fraction
) -> list[GammaVal]:
    """
    v(F_j(x)) for every member at a point x of interval k.

    For a bounded interval `variable` selects the side (tau1 or tau2, the
    other scale being 0) and tau >= 0; for an unbounded one tau = v(x - anchor).
    """
    value = const(tau)
    return [
        ground_value(row[k].at(value, variable)) for row in vsc.intervals
    ]


def cross_check_root_valuations(vsc: VscTableau) -> list[str]:
    """
    Compare RCVF1 with the tableau values of the member X at every root.

    Returns human-readable mismatches; empty when consistent.
    """
    polys = vsc.polys
    if KPoly.x() not in polys:
        return []
    ix = polys.index(KPoly.x())
    mismatches = []
    for k, code in enumerate(vsc.base.roots):
        expected = vsc.root_vals[ix][k]
        try:
            got = rcvf1_valuation(code).value
        except InvalidCode as exc:
            mismatches.append(f"root {k}: {exc}")
            continue
        if got != expected:
            mismatches.append(f"root {k} ({code}): rcvf1 {got} vs tableau {expected}")
    return mismatches
