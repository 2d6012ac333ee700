from typing import Optional


class ScreenBieException(Exception):
    """Base class for errors raised by the solver and its harness."""


class DomainError(ScreenBieException, ValueError):
    pass


class ConfigError(ScreenBieException, ValueError):
    pass


class CapacityError(ScreenBieException):
    """A mesh or space would exceed the configured element/dof cap."""


class EmptySpaceError(ScreenBieException):
    """The discrete space has no degrees of freedom; raise refine and retry."""


class SingularEvaluation(ScreenBieException, ArithmeticError):
    pass


class SpaceKindError(ScreenBieException, TypeError):
    pass


class QuadratureFailure(ScreenBieException):
    def __init__(
        self, case: str, error_estimate: float, message: Optional[str] = None
    ) -> None:
        self.case = case
        self.error_estimate = error_estimate
        super().__init__(
            message
            or f"Quadrature for {case} pairs failed (error estimate {error_estimate:.3g})"
        )


class SingularMatrix(ScreenBieException, ArithmeticError):
    def __init__(self, condition_estimate: float, message: Optional[str] = None) -> None:
        self.condition_estimate = condition_estimate
        super().__init__(
            message
            or f"Galerkin matrix is numerically singular (condition {condition_estimate:.3g})"
        )


class TruncationWarning(UserWarning):
    """The Fourier tail beyond the truncation radius is not negligible."""
