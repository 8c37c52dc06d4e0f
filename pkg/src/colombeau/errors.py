"""Exception types shared across the package."""


class DomainError(ValueError):
    """An evaluation was requested outside the admissible region."""


class ResolutionError(RuntimeError):
    """A grid or quadrature is too coarse for the requested accuracy."""


class UsageError(ValueError):
    """Arguments are inconsistent with the operation's contract."""


class IterationError(RuntimeError):
    """A fixed-point iteration failed to converge."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals or [])
