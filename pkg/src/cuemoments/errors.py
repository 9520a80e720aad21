"""Exception hierarchy shared by the library and the command line."""


class CueMomentsError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CueMomentsError, ValueError):
    """Invalid argument (bad k, mismatched sizes, duplicate shifts, ...)."""


class OutOfRangeError(InputError, IndexError):
    """Coefficient requested beyond a series' truncation order."""


class ResourceError(CueMomentsError):
    """Request exceeds a configured resource limit."""


class PrecisionError(CueMomentsError, ArithmeticError):
    """Working precision too low for a meaningful result."""


class ConsistencyError(CueMomentsError, ArithmeticError):
    """An internal cross-check failed (e.g. terms that must cancel did not)."""
