"""Exception types shared across the package."""


class HardyRingError(Exception):
    """Base class for all errors raised by hardyring."""


class DomainError(HardyRingError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NumericalOverflowError(HardyRingError, ArithmeticError):
    """A value would exceed the double-precision range."""


class QuadratureError(HardyRingError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ProfileUndefinedError(DomainError):
    """The closed-form stationary lambda-profile does not exist at this t."""


class BracketError(HardyRingError, ValueError):
    """No sign change on the requested interval."""


class ConvergenceError(HardyRingError, RuntimeError):
    """An iterative solver failed to converge."""
