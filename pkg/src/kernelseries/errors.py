"""Exception types raised across the package."""


class KernelSeriesError(Exception):
    """Base class for all package errors."""


class DomainError(KernelSeriesError, ValueError):
    """A coefficient expression is not analytic at the expansion point."""


class OrderError(KernelSeriesError, ValueError):
    """A truncation order is out of range for the requested operation."""


class CenterMismatch(KernelSeriesError, ValueError):
    """Series combined with different expansion points."""


class DivisionByZeroSeries(KernelSeriesError, ZeroDivisionError):
    """Series division by a divisor with vanishing constant term."""


class DimensionMismatch(KernelSeriesError, ValueError):
    """Block or vector sizes do not agree."""


class SingularSystem(KernelSeriesError, RuntimeError):
    """The assembled linear system could not be solved to tolerance."""

    def __init__(self, message, tags=()):
        super().__init__(message)
        self.tags = list(tags)


class SchemaError(KernelSeriesError, ValueError):
    """A problem document does not match the schema.

    ``path`` is a JSONPath-like pointer to the offending field.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class ParamError(KernelSeriesError, ValueError):
    """Example parameters violate the builder's preconditions."""


class ValidationError(KernelSeriesError, ValueError):
    """A problem failed structural validation."""
