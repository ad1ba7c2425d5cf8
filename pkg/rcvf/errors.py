"""
Exception hierarchy for the rcvf kernel.

Every failure raised by the algorithms derives from RcvfError. The four
families map onto the command line exit codes (see utils.error_classifier).
"""


class RcvfError(Exception):
    """Base class for all kernel errors."""


# Input errors (exit code 2)


class InputError(RcvfError):
    """Malformed textual input."""


class FormulaSyntaxError(InputError):
    """Text does not conform to the formula or polynomial grammar."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnboundSymbol(InputError):
    """A symbol is used where it is not declared."""


class StrictCoefficientError(InputError):
    """A K-coefficient was used while integer coefficients are enforced."""


# Domain errors (exit code 3)


class DomainError(RcvfError):
    """An operation precondition does not hold."""


class NotInValuationRing(DomainError):
    """Residue requested for an element of negative valuation."""


class DegreeOrder(DomainError):
    """Pseudo-remainder called with deg(P) < deg(Q) or deg(Q) < 1."""


class NotMonic(DomainError):
    """Tschirnhaus transform requires monic polynomials."""


class RNotInvertible(DomainError):
    """Multiplication-by-R matrix is singular."""


class ZeroPolynomial(DomainError):
    """Operation undefined on the zero polynomial."""


class UnknownRoot(DomainError):
    """Thom code is not one of the tableau roots."""


class UnknownPoly(DomainError):
    """Polynomial is not a member of the closed family."""


class InvalidCode(DomainError):
    """Thom code matches no real root of its polynomial."""


class InconsistentInput(DomainError):
    """Valuation data inconsistent with a genuine Thom interval."""


class NoFiniteTerm(DomainError):
    """Every term of the valuation min-equation is infinite."""


class ZeroValuedTerm(DomainError):
    """A linear form references a member that vanishes on the region."""


class NotInnermostExists(DomainError):
    """Elimination step called on a formula that is not an innermost existential."""


class BranchLimitExceeded(DomainError):
    """Case tree exceeded the configured number of leaves."""


class GuardExceeded(DomainError):
    """A combinatorial enumeration exceeded its configured size guard."""


# Oracle errors (exit code 4)


class OracleError(RcvfError):
    """Numeric cross-check could not confirm a symbolic result."""


class SpecializationPole(OracleError):
    """A coefficient has a pole at every tried specialization point."""


class OracleMismatch(OracleError):
    """Symbolic and numeric results disagree."""


# Internal errors (exit code 1)


class InternalError(RcvfError):
    """An algorithm invariant was violated."""


class ConstructionFailed(InternalError):
    """Generalized Taylor formula construction produced a negative coefficient."""


class InternalInvariantViolated(InternalError):
    """A proven invariant failed at run time."""
