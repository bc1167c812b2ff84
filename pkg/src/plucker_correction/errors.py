"""Exception hierarchy shared by all solvers."""


class PluckerError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PluckerError, ValueError):
    pass


class InvalidInputError(PluckerError, ValueError):
    """Non-finite values, wrong shapes and similar precondition failures."""


class DegenerateInputError(PluckerError, ValueError):
    """The input has no well-defined answer for the requested routine (e.g. all zeros)."""


class InvariantViolation(PluckerError, ArithmeticError):
    """A mathematically impossible state, e.g. q < 2|p|. Points at upstream corruption."""


class PoleError(PluckerError, ZeroDivisionError):
    pass


class NotApplicableError(PluckerError, ValueError):
    pass


class RngError(PluckerError, RuntimeError):
    pass


class ConfigError(PluckerError, ValueError):
    pass
