"""Exception hierarchy shared by all modules.

Validation problems (bad arguments, mismatched shapes, missing state) map to
CLI exit code 1; numerical blowups and training divergence map to exit code 2.
"""


class PyraflowError(Exception):
    """Base class for all package errors."""


class ValidationError(PyraflowError):
    """Invalid input that was detectable before doing any work."""


class ArgumentError(ValidationError):
    """A scalar argument is outside its documented domain."""


class DimensionError(ValidationError):
    """Grid or vector shapes are incompatible with the operation."""


class StateError(ValidationError):
    """An operation was called before its prerequisites were established."""


class NumericalError(PyraflowError):
    """A computation produced non-finite values."""


class TrainingError(NumericalError):
    """Training diverged; carries the step index where it happened."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step
