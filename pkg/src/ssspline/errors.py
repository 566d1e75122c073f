"""Exception types shared across the package."""


class SplineError(Exception):
    """Base class for all package errors."""


class DomainError(SplineError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ValidationError(SplineError, ValueError):
    """User input failed validation (bad parameters, malformed data)."""


class NumericalError(SplineError, ArithmeticError):
    """A numerical stage broke down (singular or ill-conditioned system)."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage
