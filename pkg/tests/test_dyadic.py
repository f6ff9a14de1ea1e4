from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyadic_dynamics.dyadic import (
    INF,
    Dyadic,
    SquareClass,
    abs2,
    parse_dyadic,
    same_extension,
    sqrt,
    sqrt_exists,
    square_class,
    valuation,
)
from dyadic_dynamics.errors import DyadicError, PrecisionError

from conftest import random_rational
from oracles import abs2 as oracle_abs2, is_square, v2

nonzero_rationals = st.fractions(
    min_value=-(1 << 20), max_value=1 << 20, max_denominator=1 << 16
).filter(lambda q: q != 0)


def test_parse_rational_literals():
    x = parse_dyadic("-5/4")
    assert x.is_exact and x.fraction == Fraction(-5, 4)
    assert x.valuation == -2
    assert parse_dyadic("0").valuation == INF
    assert parse_dyadic("12").fraction == 12


def test_parse_expansion_literal():
    x = parse_dyadic("2^3:101")
    assert not x.is_exact
    assert (x.valuation, x.precision, x.absolute_precision) == (3, 3, 6)
    assert x.rational() == 40
    assert x.literal() == "2^3:101"


def test_parse_precision_caps_digits():
    x = parse_dyadic("2^0:1011", precision=2)
    assert x.precision == 2 and x.literal() == "2^0:10"


@pytest.mark.parametrize("bad", ["", "1/0", "2^3:011", "abc", "2^:1", "--3", "1.5"])
def test_parse_errors(bad):
    with pytest.raises(DyadicError):
        parse_dyadic(bad)


def test_arithmetic_examples():
    assert Dyadic(Fraction(1, 3)) + Dyadic(Fraction(2, 3)) == Dyadic(1)
    prod = Dyadic(2) * Dyadic(Fraction(3, 2))
    assert prod == Dyadic(3) and prod.valuation == 0
    diff = Dyadic(1) - Dyadic(17)
    assert diff == Dyadic(-16) and diff.valuation == 4


def test_valuation_and_abs():
    assert valuation(12) == 2 and abs2(12) == Fraction(1, 4)
    assert valuation(Fraction(3, 8)) == -3 and abs2(Fraction(3, 8)) == 8
    assert abs2(0) == 0


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Dyadic(1) / Dyadic(0)


def test_truncated_cancellation_raises():
    third = Dyadic(Fraction(1, 3)).to_approx(10)
    with pytest.raises(PrecisionError):
        third - Dyadic(Fraction(1, 3))


def test_truncated_cancellation_tracks_precision():
    # 23 + O(2^5) plus 1 is 24 + O(2^5) = 2^3 (3 + O(2^2))
    s = parse_dyadic("2^0:11101") + Dyadic(1)
    assert (s.valuation, s.precision, s.absolute_precision) == (3, 2, 5)
    assert s.unit_residue(2) == 3


@given(nonzero_rationals, nonzero_rationals)
def test_truncated_arithmetic_agrees_with_exact(x, y):
    n = 40
    tx, ty = Dyadic(x).to_approx(n), Dyadic(y).to_approx(n)
    for op in ("__mul__", "__truediv__"):
        exact = getattr(Dyadic(x), op)(Dyadic(y))
        approx = getattr(tx, op)(ty)
        assert approx.valuation == exact.valuation
        assert approx.unit_residue(approx.precision) == exact.unit_residue(approx.precision)
    try:
        s = tx + ty
    except PrecisionError:
        assert v2(x + y) >= min(v2(x), v2(y)) + n if x + y else True
        return
    exact = x + y
    assert exact != 0
    assert s.valuation == v2(exact)
    assert s.unit_residue(s.precision) == Dyadic(exact).unit_residue(s.precision)


@given(nonzero_rationals, nonzero_rationals)
def test_ultrametric_and_multiplicative(x, y):
    X, Y = Dyadic(x), Dyadic(y)
    assert (X + Y).abs2() <= max(X.abs2(), Y.abs2())
    if X.abs2() != Y.abs2():
        assert (X + Y).abs2() == max(X.abs2(), Y.abs2())
    assert (X * Y).abs2() == X.abs2() * Y.abs2()


@given(nonzero_rationals)
def test_valuation_matches_oracle(x):
    assert valuation(x) == v2(x)
    assert abs2(x) == oracle_abs2(x)


@given(st.integers(min_value=-40, max_value=40), st.integers(min_value=1, max_value=1 << 30))
def test_literal_round_trip(v, unit):
    unit |= 1
    x = Dyadic.approx(v, unit, unit.bit_length())
    assert parse_dyadic(x.literal(), precision=200) == x


def test_sqrt_exists_examples():
    assert sqrt_exists(17)
    assert not sqrt_exists(2)
    assert not sqrt_exists(3)


def test_sqrt_exists_needs_three_digits():
    with pytest.raises(PrecisionError):
        sqrt_exists(parse_dyadic("2^0:11"))


def test_sqrt_exists_against_residue_oracle():
    rng = random.Random(7)
    for _ in range(1000):
        q = random_rational(rng)
        assert sqrt_exists(q) == is_square(q), q


def test_sqrt_examples():
    r = sqrt(17, 5)
    assert r.unit_residue(5) == 9
    assert r.unit_residue(2) == 1
    assert sqrt(4) == Dyadic(2)
    r = sqrt(Fraction(9, 4))
    assert r == Dyadic(Fraction(-3, 2))
    assert r * r == Dyadic(Fraction(9, 4))


def test_sqrt_rejects_non_squares_and_overreach():
    with pytest.raises(DyadicError):
        sqrt(3)
    with pytest.raises(PrecisionError):
        sqrt(parse_dyadic("2^0:10001000"), precision=10)


@given(nonzero_rationals, st.integers(min_value=3, max_value=80))
def test_sqrt_round_trip(x, precision):
    if not is_square(x):
        return
    r = sqrt(x, precision)
    assert r.unit_residue(2) == 1
    err = r.rational() ** 2 - x
    assert err == 0 or oracle_abs2(err) <= Fraction(2) ** -(v2(x) + precision)


def test_square_class_examples():
    assert square_class(-1) == SquareClass.NEG_ONE
    assert square_class(5) == SquareClass.NEG_THREE
    assert square_class(-12) == SquareClass.NEG_THREE
    assert square_class(Fraction(9, 4)) == SquareClass.SQUARE
    assert len(SquareClass) == 8


@given(nonzero_rationals)
def test_square_class_representative_quotient_is_square(x):
    c = square_class(x)
    assert is_square(Fraction(x) / c.representative)
    for other in SquareClass:
        if other != c:
            assert not is_square(Fraction(x) / other.representative)


def test_same_extension_examples():
    assert same_extension(-12, -3)
    assert not same_extension(2, 3)
    assert same_extension(Fraction(7, 5), Fraction(7, 5))


@given(nonzero_rationals, nonzero_rationals)
def test_same_extension_matches_classes(x, y):
    assert same_extension(x, y) == (square_class(x) == square_class(y))
