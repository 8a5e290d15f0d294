"""Exception types shared across the package."""


class ObserverError(Exception):
    """Base class for all errors raised by pebodrem."""


class DimensionError(ObserverError, ValueError):
    pass


class OrderingError(ObserverError, ValueError):
    pass


class OutOfRangeError(ObserverError, ValueError):
    pass


class ConfigError(ObserverError, ValueError):
    pass


class NumericalFailure(ObserverError, ArithmeticError):
    """A derivative or update produced a non-finite value.

    ``t`` is the simulation time at which it happened (``None`` if unknown).
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
