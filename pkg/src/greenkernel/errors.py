"""Exception types. CLI exit codes map onto these."""


class GreenKernelError(Exception):
    """Base class for errors raised by the package."""


class ValidationError(GreenKernelError, ValueError):
    """Bad input: parameters, dimensions, duplicate points, malformed files."""


class NumericalError(GreenKernelError, ArithmeticError):
    """A computation failed or breached its tolerance."""


class SingularityError(NumericalError):
    """A kernel derivative was requested where it does not exist."""
