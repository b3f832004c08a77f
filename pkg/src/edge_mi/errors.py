"""Exception hierarchy shared by the library and the command line."""


class EdgeError(Exception):
    """Base class for every error raised by :mod:`edge_mi`."""


class InvalidArgumentError(EdgeError, ValueError):
    pass


class EmptyInputError(InvalidArgumentError):
    pass


class InfeasibleConfigurationError(EdgeError, ValueError):
    """The ensemble constraint system has no solution (T <= d)."""


class ConditioningError(EdgeError, ArithmeticError):
    """The weight system is numerically singular.

    The condition estimate that triggered the failure is kept on
    ``condition_number``.
    """

    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = condition_number


class NumericError(EdgeError, ArithmeticError):
    pass


class InfiniteMIError(EdgeError, ValueError):
    """Mutual information is infinite (deterministic continuous dependence)."""


class EmptyStateError(EdgeError, RuntimeError):
    pass


class DecodeError(EdgeError, ValueError):
    pass


class EdgeWarning(RuntimeWarning):
    pass
