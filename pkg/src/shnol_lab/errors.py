"""Exception hierarchy shared by all modules."""


class ShnolError(Exception):
    """Base class for every error raised by shnol_lab."""


class ConfigError(ShnolError, ValueError):
    """Invalid user input: graph specs, files, scenario configs."""


class PreconditionError(ShnolError):
    """A mathematical hypothesis of an operation does not hold."""


class NotNonnegativeError(PreconditionError):
    """The quadratic form takes negative values on the requested region."""


class NotPositiveDefiniteError(PreconditionError):
    """A solve hit a non positive definite operator."""


class ConvergenceError(ShnolError):
    """An iterative method stopped before reaching its tolerance.

    ``residual`` holds the best residual reached and ``estimate`` the best
    available value (Ritz value for eigensolvers, iterate for solvers).
    """

    def __init__(self, message, residual=None, estimate=None):
        super().__init__(message)
        self.residual = residual
        self.estimate = estimate
