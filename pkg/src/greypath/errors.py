"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedRangeError(DomainError):
    """The argument is legal mathematically but outside the supported range."""


class NumericError(RuntimeError):
    """A numerical procedure failed to converge or produce a usable result."""
