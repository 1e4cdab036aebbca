"""Exception hierarchy shared by every module."""


class FbMacError(Exception):
    """Base class for all toolkit errors."""


class UnknownVariable(FbMacError, KeyError):
    pass


class DuplicateName(FbMacError, ValueError):
    pass


class OverlappingSets(FbMacError, ValueError):
    pass


class NotNormalized(FbMacError, ValueError):
    pass


class UnknownParent(FbMacError, ValueError):
    pass


class SizeGuardExceeded(FbMacError, MemoryError):
    pass


class InfiniteMutualInformation(FbMacError, ArithmeticError):
    """Residual subspaces share a direction, so the MI diverges."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class InvalidParams(FbMacError, ValueError):
    pass


class NoRealSolution(InvalidParams):
    """The xi system has no real root (lambda above its admissible bound)."""
