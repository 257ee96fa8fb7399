"""Exception hierarchy shared by all smoothpen modules."""


class SmoothPenError(Exception):
    """Base class for every error raised by this package."""


class InputError(SmoothPenError, ValueError):
    """Caller supplied an argument of the wrong shape or sign."""


class EvaluationError(SmoothPenError, ArithmeticError):
    """A user-supplied function returned NaN or failed."""


class DomainError(SmoothPenError, ArithmeticError):
    """A transform was evaluated outside the set where it is differentiable."""


class UnsupportedError(SmoothPenError):
    """The requested closed form or oracle does not exist for this configuration."""


class ConfigError(SmoothPenError, ValueError):
    """A configuration file or flag could not be interpreted.

    Parameters
    ----------
    message : str
        Human readable description.
    key : str, optional
        The offending key, reported by the CLI diagnostics.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SolverError(SmoothPenError, RuntimeError):
    """Every multistart run failed."""
