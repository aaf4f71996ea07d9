"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid user-supplied parameters or problem data."""


class NumericalEvaluationError(ArithmeticError):
    """A non-finite value appeared during evaluation.

    ``where`` carries whatever locates the failure (an abscissa, a time
    level and grid index, ...).
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where
