"""Exception types raised across the package."""


class MlpicardError(Exception):
    """Base class for all package errors."""


class InvalidOrderError(MlpicardError, ValueError):
    """Quadrature order outside the supported range."""


class InvalidIntervalError(MlpicardError, ValueError):
    """Time interval with end point before its start point."""


class ResourceLimitError(MlpicardError):
    """Requested configuration would exceed a guard limit."""


class UnknownProblemError(MlpicardError, KeyError):
    """Name not present in a registry."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown name"


class SingularDiffusionError(MlpicardError, ArithmeticError):
    """Diffusion matrix not invertible during an Euler step."""

    def __init__(self, step, condition):
        self.step = step
        self.condition = condition
        super().__init__(
            f"singular diffusion matrix at Euler step {step} "
            f"(condition estimate {condition:.3e})"
        )
