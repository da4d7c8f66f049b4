"""Exception hierarchy.

Errors fall in three families that the command line maps to exit codes:
input problems (1), domain errors such as hitting a pole or a critical
value (2), and convergence failures (3).
"""


class RuelleLabError(Exception):
    kind = "Error"

    def __init__(self, detail: str = "", **context):
        super().__init__(detail)
        self.detail = detail
        self.context = context


class InputError(RuelleLabError, ValueError):
    kind = "InputError"


class DomainError(RuelleLabError):
    kind = "DomainError"


class ConvergenceError(RuelleLabError):
    kind = "ConvergenceError"


class DegenerateInput(DomainError):
    """Constant polynomial where a degree >= 1 one is required."""

    kind = "DegenerateInput"


class PoleHit(DomainError):
    """Evaluation point lies on a pole of the map."""

    kind = "PoleHit"


class SingularMoebius(DomainError):
    """Moebius coefficients with ad - bc = 0."""

    kind = "SingularMoebius"


class Undefined(DomainError):
    """A field was evaluated on its singular set."""

    kind = "Undefined"


class AtomHit(Undefined):
    """Cauchy transform evaluated on an atom."""

    kind = "AtomHit"


class TooCloseToSupport(Undefined):
    """Point inside the quadrature exclusion zone of a curve."""

    kind = "TooCloseToSupport"


class CriticalValue(DomainError):
    """Fiber contains a critical point of the map."""

    kind = "CriticalValue"


class UndefinedAtPreimage(DomainError):
    """Field undefined at a point of the fiber."""

    kind = "UndefinedAtPreimage"


class InfinitePreimageUnhandled(DomainError):
    """Fiber contains infinity and the field does not decay fast enough."""

    kind = "InfinitePreimageUnhandled"


class AllSamplesInvalid(DomainError):
    """Every sample point was rejected."""

    kind = "AllSamplesInvalid"


class ZeroDenominator(DomainError):
    """Division by a (numerically) vanishing quantity."""

    kind = "ZeroDenominator"


class NotCritical(DomainError):
    """Point is not a critical point of the map."""

    kind = "NotCritical"


class DegenerateCritical(DomainError):
    """Critical point of multiplicity > 1."""

    kind = "DegenerateCritical"


class CriticalOrbit(DomainError):
    """Orbit of a critical value meets another critical point."""

    kind = "CriticalOrbit"


class HardyUnbounded(DomainError):
    """1/psi' fails the H^1 boundedness test."""

    kind = "HardyUnbounded"


class DerivativeVanishes(DomainError):
    """psi' vanishes on a sampled circle."""

    kind = "DerivativeVanishes"


class InvalidModel(InputError):
    """Annulus model violates its invariants."""

    kind = "InvalidModel"


class NotCoprime(InputError):
    """Numerator and denominator share a root."""

    kind = "NotCoprime"


class NonConvergence(ConvergenceError):
    """Iteration cap reached."""

    kind = "NonConvergence"


class QuadratureFailure(ConvergenceError):
    """Quadrature refinement did not settle."""

    kind = "QuadratureFailure"


class InversionFailure(ConvergenceError):
    """Newton inversion of psi failed inside the annulus."""

    kind = "InversionFailure"


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConvergenceError):
        return 3
    if isinstance(exc, DomainError):
        return 2
    return 1
