"""
Error hierarchy for slpencil.

Every error carries the process exit code the CLI reports for it:
domain errors exit with 2, convergence failures with 3.
"""


class SlpencilError(Exception):
    """Base class for all library errors"""

    exit_code = 1


class DomainError(SlpencilError, ValueError):
    """Input outside the domain of an operation"""

    exit_code = 2


class ConvergenceError(SlpencilError, RuntimeError):
    """A numerical procedure failed to converge"""

    exit_code = 3


# hn_rational
class PoleEvaluation(DomainError):
    pass


class InfinityEvaluation(DomainError):
    pass


class InvalidCoefficients(DomainError):
    pass


class NotHerglotz(InvalidCoefficients):
    pass


class DivisionRemainder(DomainError):
    pass


# function_space
class AliasRisk(DomainError):
    pass


# direct_solver
class NonFiniteState(ConvergenceError):
    pass


class MissedEigenvalue(ConvergenceError):
    pass


class NotAnEigenvalue(DomainError):
    pass


class NonPositive(ConvergenceError):
    pass


# darboux
class VanishingEigenfunction(DomainError):
    pass


class SignInconsistency(DomainError):
    pass


class DomainViolation(DomainError):
    pass


class ZeroDenominator(DomainError):
    pass


# inverse_solver
class OddParity(DomainError):
    pass


class CharacterizationViolation(DomainError):
    pass


class IllPosed(DomainError):
    pass


class BaseCaseNoConvergence(ConvergenceError):
    pass


# stability_metrics
class IndexMismatch(DomainError):
    pass


class DegeneratePair(DomainError):
    pass


# cli
class ProblemFileError(DomainError):
    pass
