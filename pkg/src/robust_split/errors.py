"""Exception types shared across the package."""


class RobustSplitError(Exception):
    """Base class for package errors."""


class UnsupportedOperation(RobustSplitError):
    """The requested operation is not available for this set variant."""


class PreconditionError(RobustSplitError, ValueError):
    """An input violates an operation's precondition."""


class SchemaError(RobustSplitError, ValueError):
    """A problem file or JSON payload does not match the schema."""


class ProjectionError(RobustSplitError, RuntimeError):
    """An iterative projection failed to converge.

    Carries the last iterate and the remaining constraint violation.
    """

    def __init__(self, message, last=None, gap=None):
        super().__init__(message)
        self.last = last
        self.gap = gap


class NoSamplesError(RobustSplitError, RuntimeError):
    """A sampling estimator had nothing to work with."""
