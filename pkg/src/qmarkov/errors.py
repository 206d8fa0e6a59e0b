"""Exception types shared across the package.

Every error raised by qmarkov derives from :class:`QmarkovError`, so callers
can catch the whole family with a single except clause.  Numerical failures
(non-convergence, loss of positivity) are kept distinct from plain input
errors; the CLI maps the two groups to different exit codes.
"""

from __future__ import annotations


class QmarkovError(Exception):
    """Base class for all package errors."""


class NotHermitian(QmarkovError):
    """Operator failed a Hermiticity check (defect above tolerance)."""


class NotPositive(QmarkovError):
    """Operator is not strictly positive definite at working precision."""


class NotNormalized(QmarkovError):
    """Trace differs from one by more than the stated tolerance."""


class SupportMismatch(QmarkovError):
    """Site labels or dimensions of the operands do not line up."""


class LengthMismatch(QmarkovError):
    """Pauli words of different length were combined."""


class BadLetter(QmarkovError):
    """A Pauli word contains a character outside I, X, Y, Z."""


class BadParameter(QmarkovError):
    """A scalar parameter is outside its admissible range."""


class Inconsistent(QmarkovError):
    """A marginal family disagrees on an overlap beyond tolerance."""


class NotChordal(QmarkovError):
    """The graph has no perfect elimination ordering."""


class NotConverged(QmarkovError):
    """An iterative solver hit its iteration cap.

    The best iterate seen so far is attached as the ``result`` attribute
    so callers can inspect diagnostics.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class MarginalMismatch(QmarkovError):
    """Two states expected to share marginals do not."""


class QuadratureNotConverged(QmarkovError):
    """Panel doubling hit its cap before the integral settled."""
