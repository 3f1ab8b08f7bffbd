"""
Exception hierarchy shared by every hermitia module
"""
from typing import Any, Optional


class HermitiaError(ValueError):
    """Base class for domain errors; the CLI maps it to exit code 1."""


class NonSquare(HermitiaError):
    pass


class NonFiniteEntry(HermitiaError):
    pass


class NotHermitian(HermitiaError):
    pass


class DimensionMismatch(HermitiaError):
    pass


class DimensionOutOfRange(HermitiaError):
    pass


class NotAnEffect(HermitiaError):
    pass


class NotProjection(HermitiaError):
    pass


class NotPositive(HermitiaError):
    pass


class NotInvertible(HermitiaError):
    pass


class NotCommuting(HermitiaError):
    pass


class NotAscending(HermitiaError):
    pass


class NoConvergence(HermitiaError):
    pass


class DomainError(HermitiaError):
    pass


class InvariantViolation(HermitiaError):
    """A theorem-level postcondition failed beyond tolerance."""


class MaxIterExceeded(HermitiaError):
    """
    Raised when an iteration stalls and its postcondition cannot be certified.

    :param message: diagnostic
    :param best: best iterate reached before the cap
    :param report: IterationReport of the stalled run
    """

    def __init__(self, message: str, best: Any = None, report: Optional[Any] = None):
        super().__init__(message)
        self.best = best
        self.report = report


class DocumentError(Exception):
    """Malformed JSON input; the CLI maps it to exit code 2."""
