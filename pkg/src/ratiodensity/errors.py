"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class RatioDensityError(Exception):
    """Base class for all library errors."""


class ConfigError(RatioDensityError, ValueError):
    """Invalid configuration or violated precondition (exit code 2)."""


class DomainError(RatioDensityError, ValueError):
    """Argument outside the region where an operation is defined."""


class PoleError(DomainError):
    """Argument sits on a pole of the function being evaluated."""


class NumericError(RatioDensityError, ArithmeticError):
    """Quadrature, extrapolation or truncation failed to reach its tolerance."""
