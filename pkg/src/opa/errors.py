"""Exception types raised across the package."""

from __future__ import annotations


class OPAError(Exception):
    """Base class for all errors raised by :mod:`opa`."""


class OutOfRange(OPAError, IndexError):
    pass


class DivergentKernel(OPAError, ValueError):
    pass


class ZeroAtOrigin(OPAError, ValueError):
    """f(0) = 0: every optimal approximant is identically zero."""


class InvalidZeroSet(OPAError, ValueError):
    pass


class InconsistentResidual(OPAError, ArithmeticError):
    pass


class SingularMatrix(OPAError, ArithmeticError):
    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class NotHermitian(OPAError, ValueError):
    pass


class NotInterior(OPAError, ValueError):
    pass


class NotUnimodular(OPAError, ValueError):
    pass


class PrecisionExhausted(OPAError, ArithmeticError):
    pass


class OutOfDomain(OPAError, ValueError):
    pass


class EmptyCompact(OPAError, ValueError):
    pass
