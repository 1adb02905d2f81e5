"""Exception hierarchy shared by all tvsyn modules.

Exit-code mapping used by the CLI:
  2 -> InvalidInputError (and subclasses)
  3 -> NotPositiveDefiniteError / AssumptionViolationError
  4 -> SolverNonConvergenceError
"""


class TvsynError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TvsynError):
    """Malformed, non-finite, or dimensionally inconsistent input."""


class CausalityViolationError(InvalidInputError):
    """Data fails a (strict) lower-triangularity requirement.

    ``offending`` lists (row, col, value) triples above the allowed band.
    """

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = list(offending or [])


class NotPositiveDefiniteError(TvsynError):
    """A matrix required to be positive definite has an eigenvalue below
    the admissible threshold."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class AssumptionViolationError(TvsynError):
    """A structural standing assumption (invertibility of an outer factor)
    failed on the supplied data."""

    def __init__(self, message, assumption=None, condition_number=None):
        super().__init__(message)
        self.assumption = assumption
        self.condition_number = condition_number


class CompletionInfeasibleError(TvsynError):
    """Sequential completion exceeded the prescribed level, i.e. the target
    value lies below the true distance."""


class IdentityViolationError(TvsynError):
    """A structural operator identity failed beyond tolerance; indicates an
    upstream bug rather than bad data."""


class UndefinedCertificateError(TvsynError):
    """A certificate quantity is requested from a numerically zero witness."""


class FeedbackIllPosedError(TvsynError):
    """The feedback interconnection has a singular resolvent."""


class MethodDisagreementError(TvsynError):
    """Independent computations of the same quantity disagree beyond
    tolerance."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = dict(values or {})


class SolverNonConvergenceError(TvsynError):
    """An iterative solver hit its iteration budget before reaching its
    stopping tolerance. Carries the best value seen and the residual."""

    def __init__(self, message, best_value=None, residual=None, iterations=None):
        super().__init__(message)
        self.best_value = best_value
        self.residual = residual
        self.iterations = iterations
