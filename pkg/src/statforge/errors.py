"""Exception types shared across the package."""


class StatforgeError(Exception):
    """Base class for all package-specific errors."""


class DomainError(StatforgeError, ValueError):
    """A parameter or argument lies outside its mathematical domain."""


class UndefinedMomentError(StatforgeError, ValueError):
    """The requested moment does not exist for this distribution."""


class DegenerateSampleError(StatforgeError, ValueError):
    """The sample is too small or too degenerate for the requested operation."""


class SingularDesignError(StatforgeError, ValueError):
    """The design matrix is rank deficient where full rank is required."""


class SeparationError(StatforgeError, RuntimeError):
    """Complete separation: the likelihood has no finite maximizer."""


class NoFiniteMLEError(StatforgeError, ValueError):
    """The likelihood is maximized only on the boundary at infinity."""


class ConvergenceError(StatforgeError, RuntimeError):
    """An iterative solver failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NestingError(StatforgeError, ValueError):
    """Models passed to a nested comparison are not actually nested."""
