"""Exception types shared across the toolkit."""


class FdSicError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(FdSicError, ValueError):
    """An argument violates an operation's precondition."""


class ConfigurationError(FdSicError, ValueError):
    """A parameter set cannot be realized (infeasible PA, RF canceller target, scenario file)."""


class EstimationError(FdSicError, ArithmeticError):
    """Least-squares estimation failed, typically because the basis is rank deficient."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
