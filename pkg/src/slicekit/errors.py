"""Exception hierarchy.

Each class carries the CLI exit code it maps to.
"""


class SliceKitError(Exception):
    exit_code = 2


class DomainError(SliceKitError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class DataError(SliceKitError, ValueError):
    """Malformed or inconsistent input data (body specs, densities)."""

    exit_code = 3


class CapabilityError(SliceKitError):
    """Request is well formed but not supported (e.g. tensor grid in n > 6)."""

    exit_code = 4


class ConvergenceError(SliceKitError, RuntimeError):
    """Iterative solver stopped without meeting its tolerance."""

    exit_code = 4

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
