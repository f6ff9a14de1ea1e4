"""Exact and truncated 2-adic numbers.

A :class:`Dyadic` is either an exact rational or a truncated expansion
``2^v * (u + O(2^N))`` with ``u`` odd.  Absolute values are returned as
exact :class:`~fractions.Fraction` powers of two.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from math import isqrt

from .errors import DyadicError, PrecisionError

INF = math.inf
DEFAULT_PRECISION = 64

_RATIONAL_RE = re.compile(r"^(-?)(\d+)(?:/(\d+))?$")
_EXPANSION_RE = re.compile(r"^2\^(-?\d+):([01]+)$")


def v2_int(n: int) -> int:
    """2-adic valuation of a nonzero integer."""
    if n == 0:
        raise DyadicError("valuation of integer zero is infinite")
    return (n & -n).bit_length() - 1


def _split(q: Fraction) -> tuple[int, int, int]:
    # q = 2^v * num / den with num, den odd
    vn = v2_int(q.numerator)
    vd = v2_int(q.denominator)
    return vn - vd, q.numerator >> vn, q.denominator >> vd


class Dyadic:
    """A 2-adic number, exact (rational) or truncated (``Approx``).

    Values are immutable.  Arithmetic between two exact values stays exact;
    anything involving a truncated operand is truncated, with the number of
    known digits tracked through the operation.
    """

    __slots__ = ("_exact", "_v", "_unit", "_prec")

    def __init__(self, value: int | Fraction | "Dyadic" = 0):
        if isinstance(value, Dyadic):
            self._exact, self._v = value._exact, value._v
            self._unit, self._prec = value._unit, value._prec
            return
        if not isinstance(value, (int, Fraction)):
            raise TypeError(f"cannot build a Dyadic from {type(value).__name__}")
        q = Fraction(value)
        self._exact = q
        self._prec = INF
        if q == 0:
            self._v, self._unit = INF, 0
        else:
            self._v = _split(q)[0]
            self._unit = None

    @classmethod
    def approx(cls, valuation: int, unit: int, precision: int) -> "Dyadic":
        """Truncated value ``2^valuation * (unit mod 2^precision)``."""
        if precision < 1:
            raise PrecisionError("a truncated value needs at least one digit")
        unit %= 1 << precision
        if not unit & 1:
            raise DyadicError("unit part of a truncated value must be odd")
        obj = object.__new__(cls)
        obj._exact = None
        obj._v = int(valuation)
        obj._unit = unit
        obj._prec = int(precision)
        return obj

    # -- inspection -------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self._exact is not None

    @property
    def is_zero(self) -> bool:
        return self._exact is not None and self._exact == 0

    @property
    def valuation(self) -> int | float:
        return self._v

    @property
    def precision(self) -> int | float:
        """Number of known significant digits (``inf`` when exact)."""
        return self._prec

    @property
    def absolute_precision(self) -> int | float:
        """The value is known modulo ``2**absolute_precision``."""
        return self._v + self._prec if self._exact is None else INF

    @property
    def fraction(self) -> Fraction:
        if self._exact is None:
            raise DyadicError("truncated value has no exact rational form")
        return self._exact

    def rational(self) -> Fraction:
        """A rational representative; exact values return themselves."""
        if self._exact is not None:
            return self._exact
        return Fraction(self._unit) * Fraction(2) ** self._v

    def abs2(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(2) ** (-self._v)

    def unit_residue(self, k: int) -> int:
        """Unit part ``x / 2^v(x)`` reduced mod ``2^k``."""
        if self.is_zero:
            raise DyadicError("zero has no unit part")
        if self._exact is None:
            if k > self._prec:
                raise PrecisionError(f"need {k} digits, only {self._prec} known")
            return self._unit % (1 << k)
        _, num, den = _split(self._exact)
        mod = 1 << k
        return num * pow(den, -1, mod) % mod

    def digits(self, k: int | None = None) -> list[int]:
        """Digits ``a_0, a_1, ...`` of the unit part (``a_0 == 1``)."""
        if k is None:
            if self._exact is not None:
                raise DyadicError("exact value has infinitely many digits; pass k")
            k = self._prec
        u = self.unit_residue(k)
        return [(u >> i) & 1 for i in range(k)]

    def to_approx(self, precision: int) -> "Dyadic":
        """Truncate to ``precision`` significant digits."""
        if self.is_zero:
            raise PrecisionError("zero has no truncated representation")
        if self._exact is None and precision > self._prec:
            raise PrecisionError("cannot add digits to a truncated value")
        return Dyadic.approx(self._v, self.unit_residue(precision), precision)

    def _scaled(self, lo: int, k: int) -> int:
        # self / 2^lo mod 2^k, requires v >= lo
        if self.is_zero:
            return 0
        shift = self._v - lo
        if shift >= k:
            return 0
        return (self.unit_residue(k - shift) << shift) % (1 << k)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> "Dyadic":
        if self._exact is not None:
            return Dyadic(-self._exact)
        return Dyadic.approx(self._v, -self._unit, self._prec)

    def __pos__(self) -> "Dyadic":
        return self

    def __add__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._exact is not None and other._exact is not None:
            return Dyadic(self._exact + other._exact)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        ap = min(self.absolute_precision, other.absolute_precision)
        lo = min(self._v, other._v)
        k = ap - lo
        s = (self._scaled(lo, k) + other._scaled(lo, k)) % (1 << k)
        if s == 0:
            raise PrecisionError(
                f"sum vanishes to the known precision O(2^{ap})"
            )
        t = v2_int(s)
        return Dyadic.approx(lo + t, s >> t, k - t)

    __radd__ = __add__

    def __sub__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._exact is not None and other._exact is not None:
            return Dyadic(self._exact * other._exact)
        if self.is_zero or other.is_zero:
            return Dyadic(0)
        n = min(self._prec, other._prec)
        u = self.unit_residue(n) * other.unit_residue(n)
        return Dyadic.approx(self._v + other._v, u, n)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by zero in Q_2")
        if self._exact is not None and other._exact is not None:
            return Dyadic(self._exact / other._exact)
        if self.is_zero:
            return Dyadic(0)
        n = min(self._prec, other._prec)
        mod = 1 << n
        u = self.unit_residue(n) * pow(other.unit_residue(n), -1, mod)
        return Dyadic.approx(self._v - other._v, u, n)

    def __rtruediv__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, e: int) -> "Dyadic":
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return Dyadic(1) / (self ** -e)
        result = Dyadic(1)
        for _ in range(e):
            result = result * self
        return result

    # -- comparison / display --------------------------------------------

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._exact is not None or other._exact is not None:
            return self._exact is not None and self._exact == other._exact
        return (self._v, self._unit, self._prec) == (other._v, other._unit, other._prec)

    def __hash__(self) -> int:
        if self._exact is not None:
            return hash(self._exact)
        return hash((self._v, self._unit, self._prec))

    def literal(self) -> str:
        """Text form; :func:`parse_dyadic` inverts it bit for bit."""
        if self._exact is not None:
            return str(self._exact)
        bits = "".join(str(d) for d in self.digits())
        return f"2^{self._v}:{bits}"

    __str__ = literal

    def __repr__(self) -> str:
        if self._exact is not None:
            return f"Dyadic({self._exact!s})"
        return f"Dyadic.approx({self._v}, {self._unit}, {self._prec})"


def _coerce(x) -> Dyadic:
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, (int, Fraction)):
        return Dyadic(x)
    return NotImplemented


def as_dyadic(x) -> Dyadic:
    if isinstance(x, str):
        return parse_dyadic(x)
    d = _coerce(x)
    if d is NotImplemented:
        raise TypeError(f"cannot interpret {x!r} as a 2-adic number")
    return d


def parse_dyadic(text: str, precision: int = DEFAULT_PRECISION) -> Dyadic:
    """Parse ``"-5/4"``-style rationals or ``"2^v:bits"`` expansions.

    Expansion bits are listed from the lowest digit up and must start with
    ``1``.  ``precision`` caps the number of digits kept from an expansion.
    """
    s = text.strip()
    m = _RATIONAL_RE.match(s)
    if m:
        sign, num, den = m.groups()
        d = int(den) if den is not None else 1
        if d == 0:
            raise DyadicError(f"zero denominator in {text!r}")
        q = Fraction(int(num), d)
        return Dyadic(-q if sign else q)
    m = _EXPANSION_RE.match(s)
    if m:
        v, bits = int(m.group(1)), m.group(2)
        if bits[0] != "1":
            raise DyadicError(f"expansion must begin with digit 1: {text!r}")
        bits = bits[:precision]
        unit = sum(1 << i for i, b in enumerate(bits) if b == "1")
        return Dyadic.approx(v, unit, len(bits))
    raise DyadicError(f"malformed 2-adic literal {text!r}")


def valuation(x) -> int | float:
    return as_dyadic(x).valuation


def abs2(x) -> Fraction:
    return as_dyadic(x).abs2()


def sqrt_exists(x) -> bool:
    """Whether ``x`` is a square in Q_2: even valuation, unit = 1 mod 8."""
    x = as_dyadic(x)
    if x.is_zero:
        raise DyadicError("sqrt_exists is defined for nonzero values")
    if x.valuation % 2:
        return False
    return x.unit_residue(3) == 1


def _canonical_sign(r: Fraction) -> Fraction:
    return r if Dyadic(r).unit_residue(2) == 1 else -r


def sqrt(x, precision: int = DEFAULT_PRECISION) -> Dyadic:
    """Square root whose unit part is 1 mod 4.

    Exact inputs that are squares of rationals give an exact result;
    otherwise the root is lifted digit by digit to ``precision`` digits.
    """
    x = as_dyadic(x)
    if x.is_zero:
        return Dyadic(0)
    if not sqrt_exists(x):
        raise DyadicError(f"{x.literal()} is not a square in Q_2")
    half = x.valuation // 2
    if x.is_exact:
        q = x.fraction
        rn, rd = isqrt(abs(q.numerator)), isqrt(q.denominator)
        if q > 0 and rn * rn == q.numerator and rd * rd == q.denominator:
            return Dyadic(_canonical_sign(Fraction(rn, rd)))
    elif precision > x.precision - 1:
        raise PrecisionError(
            f"root to {precision} digits needs {precision + 1} input digits"
        )
    u = x.unit_residue(precision + 1)
    s = 1
    for j in range(3, precision + 1):
        if (s * s - u) % (1 << (j + 1)):
            s += 1 << (j - 1)
    if (s * s - u) % (1 << (precision + 1)):
        raise ArithmeticError("square root lifting failed to verify")
    return Dyadic.approx(half, s, precision)


class SquareClass(enum.Enum):
    SQUARE = "Square"
    NEG_ONE = "NegOne"
    TWO = "Two"
    NEG_TWO = "NegTwo"
    THREE = "Three"
    NEG_THREE = "NegThree"
    SIX = "Six"
    NEG_SIX = "NegSix"

    @property
    def representative(self) -> int:
        return _REPRESENTATIVES[self]


_REPRESENTATIVES = {
    SquareClass.SQUARE: 1,
    SquareClass.NEG_ONE: -1,
    SquareClass.TWO: 2,
    SquareClass.NEG_TWO: -2,
    SquareClass.THREE: 3,
    SquareClass.NEG_THREE: -3,
    SquareClass.SIX: 6,
    SquareClass.NEG_SIX: -6,
}

# (valuation parity, unit mod 8) -> class
_CLASS_TABLE = {
    (Dyadic(r).valuation % 2, Dyadic(r).unit_residue(3)): c
    for c, r in _REPRESENTATIVES.items()
}


def square_class(x) -> SquareClass:
    """Which of the eight classes of Q_2^* / (Q_2^*)^2 contains ``x``."""
    x = as_dyadic(x)
    if x.is_zero:
        raise DyadicError("square_class is defined for nonzero values")
    return _CLASS_TABLE[(x.valuation % 2, x.unit_residue(3))]


def same_extension(x, y) -> bool:
    """Q_2(sqrt x) == Q_2(sqrt y), i.e. ``x / y`` is a square."""
    return sqrt_exists(as_dyadic(x) / as_dyadic(y))
