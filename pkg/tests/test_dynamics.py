from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyadic_dynamics.dyadic import Dyadic
from dyadic_dynamics.dynamics import (
    CaseTag,
    EventKind,
    FixedPointType,
    MapParam,
    apply,
    classify,
    escape_certified,
    expansion_exponent,
    fixed_points,
    in_xa,
    iterate,
    orbit,
    xa_spheres,
)
from dyadic_dynamics.errors import CaseMismatch, DyadicError, NonConstantScaling
from dyadic_dynamics.geometry import INFINITY, Disk, Sphere, sample_sphere_point

from conftest import random_rational
from oracles import abs2, is_square, phi, v2

F = Fraction


@pytest.mark.parametrize(
    "a, tag",
    [
        (F(-5, 4), CaseTag.EXPAND_FULL_SHIFT),
        (F(-1, 4), CaseTag.EXPAND_NO_SQRT),
        (-4, CaseTag.CONTRACT_SQRT_QUARTER),
        (-16, CaseTag.CONTRACT_SQRT_SMALL),
        (12, CaseTag.CONTRACT_MINUS3_QUARTER),
        (20, CaseTag.CONTRACT_OTHER),
        (2, CaseTag.CONTRACT_OTHER),
        (3, CaseTag.GOOD_REDUCTION),
        (1, CaseTag.GOOD_REDUCTION),
    ],
)
def test_classify_examples(a, tag):
    assert classify(a) == tag


def test_zero_parameter_rejected():
    with pytest.raises(DyadicError):
        MapParam.parse("0")
    with pytest.raises(DyadicError):
        MapParam(Dyadic(0))


def _oracle_case(a: Fraction) -> CaseTag:
    v = v2(a)
    if v == 0:
        return CaseTag.GOOD_REDUCTION
    if v < 0:
        return CaseTag.EXPAND_FULL_SHIFT if is_square(1 - a) else CaseTag.EXPAND_NO_SQRT
    if is_square(-a):
        return CaseTag.CONTRACT_SQRT_QUARTER if v == 2 else CaseTag.CONTRACT_SQRT_SMALL
    if v == 2 and is_square(3 * a):
        return CaseTag.CONTRACT_MINUS3_QUARTER
    return CaseTag.CONTRACT_OTHER


def test_classify_agrees_with_residue_oracle():
    rng = random.Random(5)
    for _ in range(2000):
        a = random_rational(rng, bound=1 << 10) * F(2) ** rng.randrange(-6, 7)
        assert classify(a) == _oracle_case(a), a


@given(
    st.fractions(max_denominator=1 << 8).filter(bool),
    st.integers(-200, 200).map(lambda k: 8 * k + 1),
    st.integers(0, 50).map(lambda k: 2 * k + 1),
)
def test_classify_invariant_under_unit_squares(a, num, den):
    u = F(num, den)
    if abs2(u) != 1 or num % 8 != 1 or den % 8 != 1:
        return
    assert classify(a * u * u) == classify(a)


def test_apply_examples():
    assert apply(F(-5, 4), F(2, 3)).value == Dyadic(F(2, 3))
    assert apply(7, 0).is_infinity
    assert apply(7, INFINITY).is_infinity
    image = apply(2, F(1, 8))
    assert image.value == Dyadic(F(33, 4))
    assert image.value.abs2() == 4


@given(
    st.fractions(max_denominator=1 << 8).filter(bool),
    st.fractions(max_denominator=1 << 8).filter(bool),
    st.fractions(max_denominator=1 << 8).filter(bool),
)
def test_difference_identity(a, x, y):
    fx, fy = apply(a, x).value.fraction, apply(a, y).value.fraction
    assert fx == phi(a, x)
    assert fx - fy == (a - 1 / (x * y)) * (x - y)


def test_iterate_matches_repeated_apply():
    x = F(3, 5)
    p = INFINITY
    y = x
    for _ in range(4):
        y = phi(F(-5, 4), y)
    assert iterate(F(-5, 4), x, 4).value == Dyadic(y)
    assert iterate(F(-5, 4), p, 3).is_infinity


def test_xa_membership():
    assert in_xa(12, 1) and in_xa(12, 3)
    assert not in_xa(12, 2)
    assert not in_xa(12, 0) and not in_xa(12, INFINITY)
    assert xa_spheres(12) == [Sphere(0, 0)]
    assert xa_spheres(-16) == [Sphere(0, i) for i in (-1, 0, 1)]
    with pytest.raises(CaseMismatch):
        in_xa(F(-5, 4), 1)


def test_escape_certificate_for_minus_quarter():
    a = F(-1, 4)
    assert escape_certified(a, 1) and escape_certified(a, INFINITY)
    assert not escape_certified(a, 4) and not escape_certified(a, 2)
    assert not escape_certified(a, 0)
    o = orbit(a, 1, 20, max_bits=4096)
    ev = o.first(EventKind.ESCAPE_CERTIFIED)
    assert ev is not None and ev.step == 0
    rhos = [s.rho_inf for s in o.steps]
    assert all(r2 <= r1 for r1, r2 in zip(rhos, rhos[1:]))
    assert rhos[-1] < F(1, 1 << 30)


def test_orbit_entered_xa_at_start():
    o = orbit(12, 1, 5, stop_on=())
    assert o.first(EventKind.ENTERED_XA).step == 0
    assert len(o.steps) == 6


def test_orbit_detects_fixed_point():
    o = orbit(F(-5, 4), F(2, 3), 10)
    ev = o.first(EventKind.CYCLE_DETECTED)
    assert ev.step == 1 and ev.detail["period"] == 1


def test_orbit_detects_infinity_cycle():
    o = orbit(20, 0, 10)
    assert o.first(EventKind.CYCLE_DETECTED).detail == {"period": 1, "start": 1}


def test_orbit_degrades_past_bit_cap():
    o = orbit(F(-5, 4), F(1, 3), 12, max_bits=64, precision=40)
    deg = o.first(EventKind.DEGRADED)
    assert deg is not None
    later = o.steps[deg.step].point.value
    assert not later.is_exact
    # the truncated orbit agrees with the exact one on every known digit
    x = F(1, 3)
    for s in o.steps:
        if s.index >= deg.step:
            v = s.point.value
            assert v.valuation == v2(x)
            assert v.unit_residue(v.precision) == Dyadic(x).unit_residue(v.precision)
        x = phi(F(-5, 4), x)


def test_truncated_mode_exhausts_precision():
    # near the repelling fixed point each step loses digits
    o = orbit(F(-5, 4), F(2, 3), 200, mode="truncated", precision=8)
    assert o.first(EventKind.PRECISION_EXHAUSTED) is not None
    assert o.first(EventKind.CYCLE_DETECTED) is None


def test_orbit_rejects_bad_arguments():
    with pytest.raises(ValueError):
        orbit(2, 1, 0)
    with pytest.raises(ValueError):
        orbit(2, 1, 3, mode="fuzzy")


def test_orbit_serialization():
    d = orbit(20, 0, 3).to_dict()
    assert d["steps"][0] == {"step": 0, "point": "0", "valuation": "+inf", "rhoInf": "1", "events": []}
    assert d["steps"][1]["point"] == "inf" and d["steps"][1]["valuation"] == "-inf"


def test_fixed_points_full_shift():
    rep = fixed_points(F(-5, 4))
    locs = [f.location.value for f in rep.finite]
    assert locs == [Dyadic(F(2, 3)), Dyadic(F(-2, 3))]
    for f in rep.finite:
        assert f.multiplier == Dyadic(F(-7, 2))
        assert f.multiplier.abs2() == 2
        assert f.kind == FixedPointType.REPELLING
        assert apply(F(-5, 4), f.location) == f.location
    assert rep.infinity.kind == FixedPointType.ATTRACTING


def test_fixed_points_absent_or_trivial():
    assert fixed_points(3).finite == ()
    assert fixed_points(3).infinity.kind == FixedPointType.INDIFFERENT
    assert fixed_points(1).finite == ()
    assert fixed_points(12).infinity.kind == FixedPointType.REPELLING


def test_irrational_fixed_points_are_fixed_to_precision():
    a = F(-13, 4)  # 1 - a = 17/4 is a square in Q_2 but not in Q
    assert is_square(1 - a)
    rep = fixed_points(a, precision=80)
    for f in rep.finite:
        x = f.location.value
        assert not x.is_exact
        img = apply(a, x).value
        k = min(img.precision, x.precision)
        assert k >= 70 and img.valuation == x.valuation
        assert img.unit_residue(k) == x.unit_residue(k)


@pytest.mark.parametrize(
    "a, region, gamma",
    [
        (F(-5, 4), Disk(F(2, 3), -3), 1),
        (F(-5, 4), Disk(F(-2, 3), -3), 1),
        (-4, Disk(F(1, 2), -1), -3),
        (2, Sphere(0, 3), -1),
        (12, Disk(8, -4), 6),
        (12, Disk(F(1, 8), 2), -2),
    ],
)
def test_expansion_exponent(a, region, gamma):
    assert expansion_exponent(a, region, sample_pairs=100) == gamma


def test_expansion_exponent_rejects_large_disks():
    with pytest.raises(NonConstantScaling):
        expansion_exponent(F(-5, 4), Disk(F(2, 3), 0))
    with pytest.raises(NonConstantScaling):
        expansion_exponent(F(-5, 4), Disk(0, -3))


def test_sphere_samples_have_requested_size():
    rng = random.Random(1)
    for i in range(-5, 6):
        assert sample_sphere_point(i, rng).value.abs2() == F(2) ** i
