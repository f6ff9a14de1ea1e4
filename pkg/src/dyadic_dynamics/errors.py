"""Exception types shared across the package."""

from __future__ import annotations


class DyadicError(ValueError):
    """Malformed literal or an operation outside its domain."""


class PrecisionError(ArithmeticError):
    """A truncated value ran out of significant digits."""


class CaseMismatch(ValueError):
    """The parameter falls in a case the operation does not handle."""


class NonConstantScaling(ValueError):
    """The map is not a single-exponent scaling on the given region."""


class FamilyNotDisjoint(ValueError):
    pass


class ConditionFailed(Exception):
    """A generalized weak-repeller condition does not hold.

    ``condition`` is ``"i"`` or ``"ii"``; ``index`` is the 1-based disk
    responsible when one can be named.
    """

    def __init__(self, condition: str, index: int | None, message: str):
        super().__init__(message)
        self.condition = condition
        self.index = index


class RoutingViolation(Exception):
    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness
