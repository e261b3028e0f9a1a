"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class NIError(Exception):
    """Base class for all errors raised by :mod:`nistab`."""


class InvalidSystem(NIError, ValueError):
    """A transfer-function description violates a structural invariant."""


class DimensionMismatch(NIError, ValueError):
    pass


class PoleProximity(NIError, ArithmeticError):
    """Evaluation point lies within ``tol_pole`` of a denominator root."""

    def __init__(self, entry: tuple[int, int], root: complex, s: complex):
        self.entry = entry
        self.root = root
        self.s = s
        super().__init__(
            f"s={s!r} is within pole tolerance of root {root!r} of entry {entry}"
        )


class PoleAtOrigin(NIError, ValueError):
    pass


class NotSimplePole(NIError, ValueError):
    pass


class NotHermitian(NIError, ValueError):
    pass


class NotPositiveDefinite(NIError, ValueError):
    pass


class NotRational(NIError, ValueError):
    pass


class HypothesisViolation(NIError):
    """G is not negative imaginary or Gbar is not strictly negative imaginary."""

    def __init__(self, message: str, diagnostics=None):
        self.diagnostics = diagnostics
        super().__init__(message)


class BandGap(NIError):
    """The low/mid/high frequency covering could not be certified on the grid."""

    def __init__(self, interval: tuple[float, float], message: str = ""):
        self.interval = interval
        super().__init__(message or f"uncovered frequency interval {interval}")


class OnContourZero(NIError, ArithmeticError):
    """det(I - tau G Gbar) vanishes (numerically) on the Nyquist contour."""

    def __init__(self, s: complex, value: float):
        self.s = s
        self.value = value
        super().__init__(f"|det| = {value:.3e} on contour at s = {s!r}")


class PhaseJump(NIError, ArithmeticError):
    pass


class SchemaError(NIError, ValueError):
    """System or report document failed validation."""
