"""Exception hierarchy shared by every twistzero module."""

from __future__ import annotations


class TwistZeroError(Exception):
    """Base class for all errors raised by the package."""


# special functions
class PoleError(TwistZeroError, ArithmeticError):
    pass


class ConvergenceError(TwistZeroError, ArithmeticError):
    def __init__(self, message: str, needed: int | None = None):
        super().__init__(message)
        self.needed = needed


class GammaOverflowError(TwistZeroError, OverflowError):
    pass


# exact arithmetic
class ZeroDenominator(TwistZeroError, ZeroDivisionError):
    pass


class NotCoprime(TwistZeroError, ValueError):
    pass


class EvenDenominator(TwistZeroError, ValueError):
    pass


class EvenInput(TwistZeroError, ValueError):
    pass


class EvenP(TwistZeroError, ValueError):
    pass


class ZeroArgument(TwistZeroError, ValueError):
    pass


# q-series / coefficient files
class FormSpecError(TwistZeroError, ValueError):
    pass


class NonIntegralPrefactor(FormSpecError):
    pass


class InsufficientTruncation(TwistZeroError, ArithmeticError):
    pass


class ParseError(TwistZeroError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class WeightMismatch(TwistZeroError, ValueError):
    pass


# L-functions and the experiments built on them
class HypothesisViolation(TwistZeroError):
    """A twist/form fails a hypothesis needed for the requested quantity."""


class CosineZero(TwistZeroError, ArithmeticError):
    pass


class SelfCheckError(TwistZeroError):
    """The functional-equation self check of a TwistedL failed."""


class RealnessViolation(TwistZeroError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class LostBracket(TwistZeroError):
    def __init__(self, message: str, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class SupportConditionError(HypothesisViolation, ValueError):
    pass
