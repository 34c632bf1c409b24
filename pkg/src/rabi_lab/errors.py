"""Exception hierarchy shared by all rabi_lab modules."""


class RabiLabError(Exception):
    """Base class for errors raised by rabi_lab."""


class DomainError(RabiLabError, ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(RabiLabError, ArithmeticError):
    """Iterative solver hit its iteration cap.

    Attributes
    ----------
    index : int
        Position in the working array where iteration stalled.
    iterations : int
        Iterations spent on that position.
    """

    def __init__(self, message, index=-1, iterations=0):
        super().__init__(message)
        self.index = index
        self.iterations = iterations


class TruncationError(RabiLabError, RuntimeError):
    """Fock-space truncation is too small for the requested accuracy."""


class WindowError(TruncationError):
    """Summation window misses more probability mass than allowed."""


class RootFindingError(RabiLabError, RuntimeError):
    """Bracketing root search found no sign change."""
