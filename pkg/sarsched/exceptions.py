# coding=utf-8

"""
Exceptions raised by sarsched that are specific to sarsched.

"""

from typing import Sequence


class ConfigError(ValueError):
    """Raised when an experiment file or scenario spec fails validation."""

    def __init__(self, message: str, fields: Sequence[str] = ()):
        super().__init__(message)
        self.fields = tuple(fields)


class TrackError(ValueError):
    """Raised for invalid generator inputs or an EveTrack breaking its kinematic caps."""
    pass


class DomainError(ValueError):
    """Raised when an operation is called outside its domain (L < 1, n < l, ...)."""
    pass


class GeometryError(ArithmeticError):
    """Raised when the worst-case distance quadratic has no real root."""
    pass


class ScheduleError(ValueError):
    """Raised for action sequences that do not describe a valid frame schedule."""
    pass


class InfeasibleScheduleError(ScheduleError):
    """Raised when a scheduled baseline cannot tile the horizon (e.g. L >= T_i)."""
    pass


class ContractViolation(RuntimeError):
    """Raised when a masked action is requested or every action is masked."""
    pass


class CheckpointError(RuntimeError):
    """Raised when a checkpoint has an unknown version or incompatible shapes."""
    pass


class NonFiniteError(BaseException):
    """
    Raised when training produces a NaN or Inf loss or parameter.

    Deliberately derived from BaseException because this exception should
    not be caught by broad handlers and should abort the run instead.

    """
    pass
