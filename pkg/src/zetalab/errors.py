"""Exception hierarchy shared by every zetalab module."""

from __future__ import annotations


class ZetaLabError(Exception):
    """Base class for all zetalab failures."""


class ConfigError(ZetaLabError, ValueError):
    pass


class NonFiniteValue(ZetaLabError, ArithmeticError):
    pass


class PrecisionExhausted(ZetaLabError, ArithmeticError):
    """The truncation error bound cannot be pushed below the requested tolerance."""


class PoleAtOne(ZetaLabError, ValueError):
    pass


class NearZero(ZetaLabError, ValueError):
    """|zeta(s)| is too small for a quotient by zeta(s) to be meaningful."""


class PoleAtNonpositiveInteger(ZetaLabError, ValueError):
    pass


class PoleInFactor(ZetaLabError, ValueError):
    pass


class PathTooCloseToZero(ZetaLabError, ValueError):
    pass


class TableIncomplete(ZetaLabError, ValueError):
    pass


class CertificationFailed(ZetaLabError):
    def __init__(self, message: str, interval: tuple[float, float] | None = None):
        super().__init__(message)
        self.interval = interval


class WindingUnstable(ZetaLabError):
    def __init__(self, message: str, box=None):
        super().__init__(message)
        self.box = box


class BoundaryZero(ZetaLabError):
    pass


class OutOfRange(ZetaLabError, ValueError):
    pass


class WindowNotCovered(ZetaLabError, ValueError):
    pass


class TOutsideAdmissibleInterval(ZetaLabError, ValueError):
    pass


class TooManyZeros(ZetaLabError, ValueError):
    pass


class InadmissibleAlphas(ZetaLabError, ValueError):
    pass


class PrimesCoverageInsufficient(ZetaLabError, ValueError):
    pass


class EmptyInput(ZetaLabError, ValueError):
    pass


class GridTouchesZero(ZetaLabError, ValueError):
    pass


class TailDominates(ZetaLabError, ValueError):
    pass


class QuadratureStalled(ZetaLabError, ArithmeticError):
    pass
