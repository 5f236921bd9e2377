"""Shared exception types.

Every error raised on purpose by this package derives from CantorLabError so
callers (and the command line front end) can tell domain failures apart from
programming mistakes.
"""

from __future__ import annotations


class CantorLabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CantorLabError):
    """An argument lies outside the mathematical domain of the operation."""


class NonConvergent(CantorLabError):
    """A limit evaluation ran out of terms before meeting its tolerance.

    Carries the best estimate seen so far in ``estimate`` (a LimitEstimate
    with ``converged=False``) so callers can still report partial results.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class InvalidSystem(CantorLabError):
    """A construction rule is inconsistent (e.g. a gap longer than its bridge)."""


class DepthOverflow(CantorLabError):
    """A refinement depth exceeds the configured bridge-count cap."""


class NotInSet(CantorLabError):
    """A point cannot be resolved to a bridge at the requested depth."""


class IncompatibleWords(CantorLabError):
    """Two word representations do not share the same scale factor."""


class InversionOutOfRange(CantorLabError):
    """The inversion rule produced a value outside (0, epsilon)."""


class UnsupportedSystem(CantorLabError):
    """The operation is not defined for this construction kind."""


class InhomogeneousSystem(CantorLabError):
    """Bridge lengths at a level spread too widely for a box-count estimate."""


class DegenerateInput(CantorLabError):
    """The input carries no usable signal (e.g. a fit with a single abscissa)."""
