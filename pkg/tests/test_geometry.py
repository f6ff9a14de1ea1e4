from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyadic_dynamics.dyadic import Dyadic, parse_dyadic
from dyadic_dynamics.errors import DyadicError, PrecisionError
from dyadic_dynamics.geometry import (
    INFINITY,
    Disk,
    OuterDisk,
    ProjPoint,
    Sphere,
    image_under_scaling,
    parse_point,
    region_contains,
    region_from_dict,
    region_subset,
    region_to_dict,
    regions_disjoint,
    sample_region,
    spherical_distance,
)

from oracles import abs2, rho

points = st.one_of(
    st.none(),
    st.fractions(min_value=-(1 << 12), max_value=1 << 12, max_denominator=1 << 10),
)


def P(x):
    return INFINITY if x is None else ProjPoint.finite(x)


def test_rho_examples():
    assert spherical_distance(0, None) == 1
    assert spherical_distance(Fraction(1, 2), None) == Fraction(1, 2)
    assert spherical_distance(2, None) == 1  # |2| = 1/2, so 2 is a unit-disk point
    assert spherical_distance(4, Fraction(1, 4)) == 1
    assert spherical_distance(8, Fraction(1, 8)) == 1
    assert spherical_distance(INFINITY, INFINITY) == 0


@given(points, points)
def test_rho_matches_affine_formula(x, y):
    assert spherical_distance(P(x), P(y)) == rho(x, y)


@given(points, points, points)
def test_rho_is_an_ultrametric(x, y, z):
    dxz = spherical_distance(P(x), P(z))
    assert dxz <= max(spherical_distance(P(x), P(y)), spherical_distance(P(y), P(z)))
    assert spherical_distance(P(x), P(y)) == spherical_distance(P(y), P(x))
    assert spherical_distance(P(x), P(y)) <= 1
    assert (spherical_distance(P(x), P(y)) == 0) == (x == y)


@given(
    st.fractions(min_value=-64, max_value=64, max_denominator=64).filter(lambda q: abs2(q) <= 1),
    st.fractions(min_value=-64, max_value=64, max_denominator=64).filter(lambda q: abs2(q) <= 1),
)
def test_rho_on_integers_is_plain_metric(x, y):
    assert spherical_distance(x, y) == abs2(x - y)


@given(points, st.integers(min_value=-9, max_value=9).filter(bool), st.integers(1, 99))
def test_rho_invariant_under_coordinate_scaling(x, k, odd):
    lam = Fraction(2) ** k * (2 * odd + 1)
    p = P(x)
    if x is None:
        q = ProjPoint.from_coords(lam, 0)
    else:
        q = ProjPoint.from_coords(Fraction(x) * lam, lam)
    for other in (0, Fraction(3, 8), None):
        assert spherical_distance(p, other) == spherical_distance(q, other)


def test_from_coords_rejects_origin():
    with pytest.raises(DyadicError):
        ProjPoint.from_coords(0, 0)


def test_parse_point():
    assert parse_point("inf").is_infinity
    assert parse_point("∞").is_infinity
    assert parse_point("-2/3").value == Dyadic(Fraction(-2, 3))


def test_disk_disjointness_and_containment():
    assert regions_disjoint(Disk(Fraction(1, 2), -1), Disk(Fraction(-1, 2), -1))
    assert region_subset(Sphere(0, 3), OuterDisk(2))
    assert not region_subset(Sphere(0, 2), OuterDisk(2))
    assert region_subset(Disk(Fraction(2, 3), -4), Disk(Fraction(2, 3), -3))
    assert not region_subset(Disk(Fraction(2, 3), -3), Disk(Fraction(2, 3), -4))
    assert not regions_disjoint(OuterDisk(1), OuterDisk(5))
    assert regions_disjoint(Disk(0, -4), OuterDisk(3))


def test_sphere_is_a_disk():
    s = Sphere(0, 3)
    assert s == Disk(Fraction(1, 8), 2)
    assert region_contains(s, Fraction(1, 8))
    assert region_contains(s, Fraction(3, 8))
    assert not region_contains(s, Fraction(1, 4))
    assert not region_contains(s, INFINITY)


def test_disk_equality_ignores_center_choice():
    assert Disk(Fraction(2, 3), -3) == Disk(Fraction(2, 3) + 8, -3)
    assert hash(Disk(Fraction(2, 3), -3)) == hash(Disk(Fraction(2, 3) + 8, -3))
    assert Disk(Fraction(2, 3), -3) != Disk(Fraction(2, 3) + 4, -3)


def test_disk_canonical_center_is_short():
    d = Disk(Fraction(123456789, 7), -6)
    c = d.canonical()
    assert c == d and c.center.denominator == 1 and 0 <= c.center < 64


def test_outer_disk_membership():
    out = OuterDisk(3)
    assert region_contains(out, INFINITY)
    assert region_contains(out, Fraction(1, 16))
    assert not region_contains(out, Fraction(1, 8))
    assert not region_contains(out, 0)


def test_truncated_center_needs_precision():
    c = parse_dyadic("2^0:101")
    assert Disk(c, -3) == Disk(5, -3)
    with pytest.raises(PrecisionError):
        Disk(c, -4)


def test_truncated_membership_decided_when_possible():
    d = Disk(Fraction(1, 3), -3)
    assert region_contains(d, parse_dyadic("2^0:1101"))
    assert not region_contains(d, parse_dyadic("2^0:1011"))
    with pytest.raises(PrecisionError):
        region_contains(Disk(Fraction(1, 3), -6), parse_dyadic("2^0:1101"))


def test_image_under_scaling():
    assert image_under_scaling(Disk(Fraction(2, 3), -3), Fraction(2, 3), 1) == Disk(Fraction(2, 3), -2)


@pytest.mark.parametrize(
    "region",
    [Disk(Fraction(2, 3), -3), Sphere(0, 3), OuterDisk(4), Disk(0, -5), Disk(Fraction(-1, 2), -1)],
)
def test_samples_lie_in_region(region):
    rng = random.Random(3)
    for _ in range(200):
        assert region_contains(region, sample_region(region, rng))


@pytest.mark.parametrize("region", [Disk(Fraction(2, 3), -3), Sphere(0, -2), OuterDisk(-1)])
def test_region_dict_round_trip(region):
    back = region_from_dict(region_to_dict(region))
    assert type(back) is type(region) and back == region


def _random_disk(rng: random.Random) -> Disk:
    center = Fraction(rng.randrange(-64, 65), 1 << rng.randrange(0, 4))
    return Disk(center, rng.randrange(-5, 3))


def test_disk_subset_is_a_partial_order():
    rng = random.Random(11)
    for _ in range(1000):
        d1, d2, d3 = (_random_disk(rng) for _ in range(3))
        assert region_subset(d1, d1)
        if region_subset(d1, d2) and region_subset(d2, d1):
            assert d1 == d2
        if region_subset(d1, d2) and region_subset(d2, d3):
            assert region_subset(d1, d3)
