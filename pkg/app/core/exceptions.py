from typing import Optional


class CogPilotError(Exception):
    """Base class for errors raised by cogpilot."""


class DegenerateDecisionError(CogPilotError, ValueError):
    """A posterior was requested for a sensing decision that has zero probability."""


class SingularSystemError(CogPilotError, ArithmeticError):
    """The observation covariance of an estimator is not positive definite."""


class ConfigValidationError(CogPilotError, ValueError):
    """An experiment config or preset failed validation."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ResultWriteError(CogPilotError, OSError):
    """Result output could not be written."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path
