"""Exception types raised by the library."""


class AssumptionError(ValueError):
    """Model parameters violate the positivity conditions of the minimal martingale measure."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidStateError(RuntimeError):
    """A simulated state left the region where the measure change is defined (1 - theta <= 0)."""


class GridRejectedError(ValueError):
    """A quadrature grid approximates C1 too poorly to be used."""

    def __init__(self, message, c1_error=None):
        super().__init__(message)
        self.c1_error = c1_error
