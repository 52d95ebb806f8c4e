class SerrinLabError(Exception):
    """Base class for all errors raised by serrin_lab."""


class ValidationError(SerrinLabError, ValueError):
    """Invalid user input (parameters, configs, domains)."""


class DomainError(SerrinLabError, ValueError):
    """A function was evaluated outside its domain of definition."""


class FluxInversionError(SerrinLabError, ArithmeticError):
    """The flux map t -> t a(t) could not be inverted.

    ``point`` is the argument at which monotonicity (or finiteness) failed.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class QuadratureError(SerrinLabError, ArithmeticError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ConvergenceError(SerrinLabError, ArithmeticError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class GeometryError(SerrinLabError, ValueError):
    """The moving-plane engine detected an internal inconsistency."""


class FluxExtractionError(SerrinLabError, ArithmeticError):
    """Too many boundary-flux samples could not be evaluated."""
