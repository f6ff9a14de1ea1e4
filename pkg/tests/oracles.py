"""Brute-force reference computations that share no code with the package."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

MOD_BITS = 12


@lru_cache(maxsize=None)
def squares_mod(bits: int = MOD_BITS) -> frozenset[int]:
    m = 1 << bits
    return frozenset(y * y % m for y in range(m))


def v2(q: Fraction | int) -> int:
    """Valuation by repeated division."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("zero")
    n, d, v = q.numerator, q.denominator, 0
    while n % 2 == 0:
        n //= 2
        v += 1
    while d % 2 == 0:
        d //= 2
        v -= 1
    return v


def abs2(q) -> Fraction:
    if Fraction(q) == 0:
        return Fraction(0)
    return Fraction(2) ** (-v2(q))


def is_square(q) -> bool:
    """Square test on residues mod 2^12.

    num/den and num*den differ by the square den^2; factors of 4 are
    stripped until the valuation is at most 8, so squares mod 2^12 decide.
    """
    q = Fraction(q)
    m = q.numerator * q.denominator
    while m % 4 == 0 and v2(m) > 8:
        m //= 4
    return m % (1 << MOD_BITS) in squares_mod()


def phi(a: Fraction, x):
    """a x + 1/x on Q u {None}, None standing for infinity."""
    if x is None or x == 0:
        return None
    return a * x + 1 / Fraction(x)


def rho(x, y) -> Fraction:
    """Spherical distance through the affine formulas, with None as infinity."""
    if x is None and y is None:
        return Fraction(0)
    if y is None:
        x, y = y, x
    if x is None:
        return Fraction(1) if abs2(y) <= 1 else 1 / abs2(y)
    return abs2(x - y) / (max(abs2(x), Fraction(1)) * max(abs2(y), Fraction(1)))
