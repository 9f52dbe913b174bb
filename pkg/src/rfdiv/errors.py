"""Exception hierarchy for rfdiv.

Every error raised by this package derives from :class:`RfdivError`, so
callers can catch one type at the boundary.  Argument and shape problems
additionally derive from :class:`ValueError` to stay friendly to generic
handling code.
"""

from __future__ import annotations


class RfdivError(Exception):
    """Base class for all package errors."""


class InvalidArgument(RfdivError, ValueError):
    """An argument violates a documented precondition."""


class DimensionMismatch(InvalidArgument):
    """Array shapes are inconsistent with the object they are used with."""


class EmptySampleSet(InvalidArgument):
    """An estimator received zero samples."""


class InsufficientSamples(InvalidArgument):
    """An estimator received fewer samples than its neighbor order needs."""


class DomainViolation(RfdivError, RuntimeError):
    """A training sample fell outside the ball the method assumes."""


class QuadratureFailure(RfdivError, RuntimeError):
    """A numerical integral did not converge to the requested tolerance."""


class NumericalFailure(RfdivError, RuntimeError):
    """A computation produced a non-finite or meaningless result."""


class ExponentOverflow(NumericalFailure):
    """An exponential exceeded the double-precision range.

    Raised by the audited exponential helper in :mod:`rfdiv.constants`;
    bound evaluators catch it and report a vacuous status instead.
    """


class ConfigError(RfdivError, ValueError):
    """A run configuration file or flag set could not be interpreted.

    Carries the offending line number when the problem came from a file.
    """

    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
