"""The map phi_a(x) = a x + 1/x on P^1(Q_2)."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .dyadic import (
    DEFAULT_PRECISION,
    INF,
    Dyadic,
    as_dyadic,
    parse_dyadic,
    sqrt,
    sqrt_exists,
)
from .errors import CaseMismatch, DyadicError, NonConstantScaling, PrecisionError
from .geometry import (
    INFINITY,
    Disk,
    ProjPoint,
    Region,
    Sphere,
    as_point,
    sample_region,
    spherical_distance,
    region_contains,
)

DEFAULT_MAX_BITS = 1 << 20


class CaseTag(str, enum.Enum):
    GOOD_REDUCTION = "GoodReduction"
    EXPAND_NO_SQRT = "ExpandNoSqrt"
    EXPAND_FULL_SHIFT = "ExpandFullShift"
    CONTRACT_SQRT_SMALL = "ContractSqrtSmall"
    CONTRACT_SQRT_QUARTER = "ContractSqrtQuarter"
    CONTRACT_MINUS3_QUARTER = "ContractMinus3Quarter"
    CONTRACT_OTHER = "ContractOther"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MapParam:
    """The parameter ``a`` of phi_a; zero is rejected."""

    a: Dyadic

    def __post_init__(self):
        a = as_dyadic(self.a)
        if a.is_zero:
            raise DyadicError("a = 0 gives a degenerate map")
        object.__setattr__(self, "a", a)

    @classmethod
    def parse(cls, text: str, precision: int = DEFAULT_PRECISION) -> "MapParam":
        return cls(parse_dyadic(text, precision))

    @property
    def valuation(self) -> int:
        return self.a.valuation

    def abs2(self) -> Fraction:
        return self.a.abs2()

    @property
    def unit_mod8(self) -> int:
        return self.a.unit_residue(3)

    def literal(self) -> str:
        return self.a.literal()


def as_param(a) -> MapParam:
    if isinstance(a, MapParam):
        return a
    if isinstance(a, str):
        return MapParam.parse(a)
    return MapParam(as_dyadic(a))


def classify(a) -> CaseTag:
    """Parameter case; depends only on v(a), a mod 8 and whether sqrt(1-a) exists."""
    p = as_param(a)
    v = p.valuation
    if v == 0:
        return CaseTag.GOOD_REDUCTION
    if v < 0:
        if sqrt_exists(Dyadic(1) - p.a):
            return CaseTag.EXPAND_FULL_SHIFT
        return CaseTag.EXPAND_NO_SQRT
    if sqrt_exists(-p.a):
        return CaseTag.CONTRACT_SQRT_QUARTER if v == 2 else CaseTag.CONTRACT_SQRT_SMALL
    if v == 2 and p.unit_mod8 == 3:
        return CaseTag.CONTRACT_MINUS3_QUARTER
    return CaseTag.CONTRACT_OTHER


# -- evaluation ------------------------------------------------------------


def phi_value(a: Dyadic, x: Dyadic | None) -> Dyadic | None:
    """phi_a on affine values; ``None`` stands for infinity."""
    if x is None or x.is_zero:
        return None
    if a.is_exact and x.is_exact:
        q, c = x.fraction, a.fraction
        p, d = q.numerator, q.denominator
        # (a p^2 + q^2) / (p q) with a = an/ad
        return Dyadic(
            Fraction(c.numerator * p * p + c.denominator * d * d, c.denominator * p * d)
        )
    return a * x + Dyadic(1) / x


def apply(a, point) -> ProjPoint:
    """phi_a([x:y]) = [a x^2 + y^2 : x y]; phi(0) = phi(inf) = inf."""
    p = as_param(a)
    return ProjPoint(phi_value(p.a, as_point(point).value))


def iterate(a, point, n: int) -> ProjPoint:
    p = as_param(a)
    x = as_point(point).value
    for _ in range(n):
        x = phi_value(p.a, x)
    return ProjPoint(x)


def derivative(a, x) -> Dyadic:
    """phi'(x) = a - 1/x^2."""
    x = as_dyadic(x)
    return as_param(a).a - Dyadic(1) / (x * x)


# -- regions attached to the parameter -------------------------------------


def in_xa(a, point) -> bool:
    """Membership in X_a = {sqrt|a| < |x| < 1/sqrt|a|} (open), for |a| < 1."""
    p = as_param(a)
    if p.valuation <= 0:
        raise CaseMismatch("X_a is defined only for |a| < 1")
    x = as_point(point).value
    if x is None or x.is_zero:
        return False
    return 2 * abs(x.valuation) < p.valuation


def xa_spheres(a) -> list[Sphere]:
    """X_a as the explicit list of spheres S(0, 2^i) it contains."""
    p = as_param(a)
    if p.valuation <= 0:
        raise CaseMismatch("X_a is defined only for |a| < 1")
    v = p.valuation
    return [Sphere(0, i) for i in range(-v, v + 1) if 2 * abs(i) < v]


def escape_certified(a, point) -> bool:
    """For |a| > 1: |a x| > |1/x|, after which |phi^n(x)| = |a|^n |x| grows forever."""
    p = as_param(a)
    if p.valuation >= 0:
        return False
    x = as_point(point).value
    if x is None:
        return True
    if x.is_zero:
        return False
    return 2 * x.valuation < -p.valuation


# -- orbits ----------------------------------------------------------------


class EventKind(str, enum.Enum):
    ENTERED_XA = "EnteredXa"
    ESCAPE_CERTIFIED = "EscapeCertified"
    CYCLE_DETECTED = "CycleDetected"
    PRECISION_EXHAUSTED = "PrecisionExhausted"
    DEGRADED = "DegradedToTruncated"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class OrbitEvent:
    kind: EventKind
    step: int
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "step": self.step, **self.detail}


@dataclass(frozen=True)
class OrbitStep:
    index: int
    point: ProjPoint
    rho_inf: Fraction

    @property
    def valuation(self):
        return self.point.valuation

    @property
    def abs2(self):
        x = self.point.value
        return INF if x is None else x.abs2()

    def to_dict(self, events: Iterable[OrbitEvent] = ()) -> dict:
        v = self.valuation
        return {
            "step": self.index,
            "point": self.point.literal(),
            "valuation": v if isinstance(v, int) else ("+inf" if v > 0 else "-inf"),
            "rhoInf": str(self.rho_inf),
            "events": [e.kind.value for e in events if e.step == self.index],
        }


@dataclass
class Orbit:
    param: MapParam
    steps: list[OrbitStep]
    events: list[OrbitEvent]

    def points(self) -> list[ProjPoint]:
        return [s.point for s in self.steps]

    def first(self, kind: EventKind) -> OrbitEvent | None:
        for e in self.events:
            if e.kind == kind:
                return e
        return None

    def to_dict(self) -> dict:
        return {
            "a": self.param.literal(),
            "steps": [s.to_dict(self.events) for s in self.steps],
            "events": [e.to_dict() for e in self.events],
        }


def _too_big(x: Dyadic, max_bits: int) -> bool:
    q = x.fraction
    return max(q.numerator.bit_length(), q.denominator.bit_length()) > max_bits


def orbit(
    a,
    point,
    max_steps: int,
    mode: str = "exact",
    precision: int = DEFAULT_PRECISION,
    max_bits: int = DEFAULT_MAX_BITS,
    stop_on: Iterable[EventKind] = (EventKind.CYCLE_DETECTED,),
) -> Orbit:
    """Iterate phi_a from ``point`` for up to ``max_steps`` steps.

    Step 0 is the starting point.  In exact mode points stay rational until
    a numerator or denominator exceeds ``max_bits`` bits, at which point the
    orbit continues on truncated values with ``precision`` digits and a
    :attr:`EventKind.DEGRADED` event is logged.  Precision exhaustion always
    ends the orbit.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if mode not in ("exact", "truncated"):
        raise ValueError(f"unknown orbit mode {mode!r}")
    p = as_param(a)
    stop_on = set(stop_on)
    x = as_point(point).value
    exact = mode == "exact" and p.a.is_exact and (x is None or x.is_exact)
    if mode == "truncated" and x is not None and x.is_exact and not x.is_zero:
        x = x.to_approx(precision)
    contracting = p.valuation > 0
    expanding = p.valuation < 0
    seen: dict = {}
    steps: list[OrbitStep] = []
    events: list[OrbitEvent] = []
    flagged: set[EventKind] = set()

    def log(kind: EventKind, step: int, **detail) -> bool:
        if kind in flagged and kind != EventKind.DEGRADED:
            return False
        flagged.add(kind)
        events.append(OrbitEvent(kind, step, detail))
        return kind in stop_on

    for n in range(max_steps + 1):
        if exact and x is not None and _too_big(x, max_bits):
            x = x.to_approx(precision)
            exact = False
            log(EventKind.DEGRADED, n, precision=precision)
        pt = ProjPoint(x)
        try:
            rho = spherical_distance(pt, INFINITY)
        except PrecisionError:
            log(EventKind.PRECISION_EXHAUSTED, n)
            break
        steps.append(OrbitStep(n, pt, rho))
        stop = False
        if contracting and in_xa(p, pt):
            stop |= log(EventKind.ENTERED_XA, n)
        if expanding and escape_certified(p, pt):
            stop |= log(EventKind.ESCAPE_CERTIFIED, n)
        if exact:
            key = None if x is None else x.fraction
            if key in seen:
                stop |= log(EventKind.CYCLE_DETECTED, n, period=n - seen[key], start=seen[key])
            else:
                seen[key] = n
        if stop or n == max_steps:
            break
        try:
            x = phi_value(p.a, x)
        except PrecisionError:
            log(EventKind.PRECISION_EXHAUSTED, n + 1)
            break
    return Orbit(p, steps, events)


# -- fixed points ----------------------------------------------------------


class FixedPointType(str, enum.Enum):
    ATTRACTING = "attracting"
    INDIFFERENT = "indifferent"
    REPELLING = "repelling"
    SUPERATTRACTING = "superattracting"

    def __str__(self) -> str:
        return self.value


def _type_of(multiplier: Dyadic) -> FixedPointType:
    if multiplier.is_zero:
        return FixedPointType.SUPERATTRACTING
    v = multiplier.valuation
    if v > 0:
        return FixedPointType.ATTRACTING
    if v < 0:
        return FixedPointType.REPELLING
    return FixedPointType.INDIFFERENT


@dataclass(frozen=True)
class FixedPoint:
    location: ProjPoint
    multiplier: Dyadic
    kind: FixedPointType

    def to_dict(self) -> dict:
        return {
            "location": self.location.literal(),
            "multiplier": self.multiplier.literal(),
            "multiplierAbs": str(self.multiplier.abs2()),
            "type": self.kind.value,
        }


@dataclass(frozen=True)
class FixedPointReport:
    points: tuple[FixedPoint, ...]

    @property
    def finite(self) -> tuple[FixedPoint, ...]:
        return tuple(f for f in self.points if not f.location.is_infinity)

    @property
    def infinity(self) -> FixedPoint:
        return next(f for f in self.points if f.location.is_infinity)

    def to_dict(self) -> dict:
        return {"points": [f.to_dict() for f in self.points]}


def ordered_pair(c: Dyadic) -> tuple[Dyadic, Dyadic]:
    """``(c, -c)`` with a positive rational first; truncated values keep ``c`` first."""
    if c.is_exact and c.fraction < 0:
        return -c, c
    return c, -c


def _agrees(x: Dyadic, y: Dyadic) -> bool:
    try:
        return (x - y).is_zero
    except PrecisionError:
        return True


def fixed_points(a, precision: int = DEFAULT_PRECISION) -> FixedPointReport:
    """Finite fixed points +-1/sqrt(1-a) (when they exist) and infinity.

    The finite ones have multiplier 2a - 1; infinity has multiplier 1/a,
    the derivative at 0 of psi(x) = 1/phi(1/x) = x / (a + x^2).
    """
    p = as_param(a)
    points = []
    one_minus = Dyadic(1) - p.a
    if not one_minus.is_zero and sqrt_exists(one_minus):
        x1, x2 = ordered_pair(Dyadic(1) / sqrt(one_minus, precision))
        mult = 2 * p.a - 1
        for x in (x1, x2):
            image = phi_value(p.a, x)
            if image is None or not _agrees(image, x):
                raise ArithmeticError(f"claimed fixed point {x.literal()} is not fixed")
            points.append(FixedPoint(ProjPoint(x), mult, _type_of(mult)))
    mult_inf = Dyadic(1) / p.a
    points.append(FixedPoint(INFINITY, mult_inf, _type_of(mult_inf)))
    return FixedPointReport(tuple(points))


# -- local scaling ---------------------------------------------------------


def certified_exponent(a, disk: Disk) -> int:
    """Exponent g with |phi(x) - phi(y)| = 2^g |x - y| on the whole disk.

    Writing x = c + s, the factor a - 1/(xy) differs from a - 1/c^2 by at
    most |c|^-3 2^r, so a strict inequality pins its absolute value.
    """
    p = as_param(a)
    if isinstance(disk, Sphere):
        disk = disk.as_disk()
    if disk.contains_zero():
        raise NonConstantScaling(f"{disk} contains 0")
    c = Dyadic(disk.center)
    dist = p.a - Dyadic(1) / (c * c)
    bound_log = 3 * c.valuation + disk.radius_log
    if dist.is_zero or -dist.valuation <= bound_log:
        raise NonConstantScaling(f"scaling factor of phi is not constant on {disk}")
    return -dist.valuation


def scaling_ratio_log(f: Callable[[Dyadic], Dyadic], x: Dyadic, y: Dyadic) -> int:
    """log2 of |f(x) - f(y)| / |x - y|."""
    return (x - y).valuation - (f(x) - f(y)).valuation


def measure_exponent(
    f: Callable[[Dyadic], Dyadic],
    region: Region,
    sample_pairs: int = 64,
    seed: int = 0,
) -> int:
    """Common scaling exponent of ``f`` over random pairs in a finite disk."""
    rng = random.Random(seed)
    found = None
    done = 0
    while done < sample_pairs:
        x = sample_region(region, rng).value
        y = sample_region(region, rng).value
        if x is None or y is None or x == y:
            continue
        g = scaling_ratio_log(f, x, y)
        if found is None:
            found = g
        elif g != found:
            raise NonConstantScaling(
                f"exponents {found} and {g} both occur on {region}"
            )
        done += 1
    return found


def expansion_exponent(a, region: Region, sample_pairs: int = 64, seed: int = 0) -> int:
    """Sampled scaling exponent of phi_a on a disk avoiding 0 and infinity.

    When the analytic certificate applies it must agree with the samples.
    """
    p = as_param(a)
    disk = region.as_disk() if isinstance(region, Sphere) else region
    if not isinstance(disk, Disk) or disk.contains_zero():
        raise NonConstantScaling(f"{region} meets 0 or infinity")

    def f(x: Dyadic) -> Dyadic:
        return phi_value(p.a, x)

    g = measure_exponent(f, disk, sample_pairs, seed)
    try:
        cert = certified_exponent(p, disk)
    except NonConstantScaling:
        return g
    if cert != g:
        raise ArithmeticError(f"sampled exponent {g} contradicts certified {cert}")
    return g


def region_is_in(region: Region, point) -> bool:
    return region_contains(region, point)
