"""Exception hierarchy shared by all estimators."""


class RammlError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(RammlError, ValueError):
    pass


class SingularSystem(RammlError, ArithmeticError):
    """A (weighted) Gram matrix is singular to working precision."""


class ZeroTotalWeight(RammlError, ValueError):
    pass


class InvalidParams(RammlError, ValueError):
    pass


class InvalidCorrelation(RammlError, ValueError):
    pass


class DegenerateScale(RammlError, ArithmeticError):
    """A robust scale estimate collapsed to zero."""


class DegenerateDirection(RammlError, ArithmeticError):
    pass


class TooFewObservations(RammlError, ValueError):
    pass


class AllTiesInV(RammlError, ValueError):
    """Every consecutive pair of predictor sums is tied."""


class NotConverged(RammlError, RuntimeError):
    """An iterative routine hit its iteration cap.

    The partial result, when one exists, is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
