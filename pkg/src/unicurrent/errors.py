class UnicurrentError(Exception):
    """Base class for all library errors."""


class InvalidArgument(UnicurrentError, ValueError):
    pass


class ConvergenceFailure(UnicurrentError, ArithmeticError):
    """A limit or quadrature did not settle to the requested tolerance.

    ``estimates`` holds the last two values that were compared.
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)
