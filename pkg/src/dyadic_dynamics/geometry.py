"""Points of P^1(Q_2), the spherical metric, and disks/spheres.

Regions come in three kinds: closed disks ``D(c, 2^r)``, spheres
``S(c, 2^r)`` and outer regions ``P^1 \\ D(0, 2^r)`` (which contain
infinity).  Membership and containment are decided exactly from
valuations.  In Q_2 every sphere is itself a disk,
``S(c, 2^r) = D(c + 2^-r, 2^(r-1))``, which is how spheres are compared.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .dyadic import INF, Dyadic, as_dyadic, parse_dyadic
from .errors import DyadicError, PrecisionError


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^1(Q_2); ``value is None`` is the point at infinity."""

    value: Dyadic | None

    @classmethod
    def finite(cls, x) -> "ProjPoint":
        return cls(as_dyadic(x))

    @classmethod
    def from_coords(cls, x1, x2) -> "ProjPoint":
        x1, x2 = as_dyadic(x1), as_dyadic(x2)
        if x2.is_zero:
            if x1.is_zero:
                raise DyadicError("[0:0] is not a point of P^1")
            return INFINITY
        return cls(x1 / x2)

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def coords(self) -> tuple[Dyadic, Dyadic]:
        """Normalized homogeneous coordinates: max abs is 1, one entry is 1."""
        if self.value is None:
            return Dyadic(1), Dyadic(0)
        x = self.value
        if x.is_zero or x.valuation >= 0:
            return x, Dyadic(1)
        return Dyadic(1), Dyadic(1) / x

    @property
    def valuation(self) -> int | float:
        return -INF if self.value is None else self.value.valuation

    def literal(self) -> str:
        return "inf" if self.value is None else self.value.literal()

    def __str__(self) -> str:
        return self.literal()


INFINITY = ProjPoint(None)


def as_point(x) -> ProjPoint:
    if isinstance(x, ProjPoint):
        return x
    if x is None:
        return INFINITY
    return ProjPoint.finite(x)


def parse_point(text: str, precision: int | None = None) -> ProjPoint:
    s = text.strip()
    if s in ("inf", "∞"):
        return INFINITY
    if precision is None:
        return ProjPoint(parse_dyadic(s))
    return ProjPoint(parse_dyadic(s, precision))


def spherical_distance(p, q) -> Fraction:
    """rho(P, Q) = |x1 y2 - x2 y1| / (max(|x1|,|y1|) max(|x2|,|y2|))."""
    p, q = as_point(p), as_point(q)
    x1, y1 = p.coords()
    x2, y2 = q.coords()
    # normalized coordinates make both max-factors equal to 1
    return (x1 * y2 - x2 * y1).abs2()


# -- regions ---------------------------------------------------------------


def _canonical_center(c: Fraction, radius_log: int) -> Fraction:
    # representative of c mod 2^(-radius_log) with only the digits below it
    k = -radius_log
    if c == 0:
        return Fraction(0)
    d = Dyadic(c)
    v = d.valuation
    if v >= k:
        return Fraction(0)
    return Fraction(d.unit_residue(k - v)) * Fraction(2) ** v


def _exact_center(center, radius_log: int) -> Fraction:
    c = as_dyadic(center)
    if c.is_exact:
        return c.fraction
    if c.absolute_precision < -radius_log:
        raise PrecisionError(
            f"center known to O(2^{c.absolute_precision}) cannot pin a disk "
            f"of radius 2^{radius_log}"
        )
    return c.rational()


@dataclass(frozen=True, eq=False)
class Disk:
    """Closed disk ``D(center, 2^radius_log)``."""

    center: Fraction
    radius_log: int

    def __post_init__(self):
        object.__setattr__(self, "center", _exact_center(self.center, self.radius_log))
        object.__setattr__(self, "radius_log", int(self.radius_log))

    def _key(self):
        return ("disk", _canonical_center(self.center, self.radius_log), self.radius_log)

    def __eq__(self, other):
        if isinstance(other, Sphere):
            other = other.as_disk()
        if not isinstance(other, Disk):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def radius(self) -> Fraction:
        return Fraction(2) ** self.radius_log

    def contains_zero(self) -> bool:
        return self.center == 0 or Dyadic(self.center).valuation >= -self.radius_log

    def canonical(self) -> "Disk":
        """The same disk with its shortest 2-adic center."""
        return Disk(_canonical_center(self.center, self.radius_log), self.radius_log)

    def __str__(self) -> str:
        return f"D({self.center}, 2^{self.radius_log})"


@dataclass(frozen=True, eq=False)
class Sphere:
    """Sphere ``S(center, 2^radius_log)``."""

    center: Fraction
    radius_log: int

    def __post_init__(self):
        # pinning the sphere needs one digit more than the disk it spans
        object.__setattr__(self, "center", _exact_center(self.center, self.radius_log - 1))
        object.__setattr__(self, "radius_log", int(self.radius_log))

    def as_disk(self) -> Disk:
        return Disk(self.center + Fraction(2) ** (-self.radius_log), self.radius_log - 1)

    def __eq__(self, other):
        if isinstance(other, (Disk, Sphere)):
            return self.as_disk() == (other.as_disk() if isinstance(other, Sphere) else other)
        return NotImplemented

    def __hash__(self):
        return hash(self.as_disk())

    def __str__(self) -> str:
        return f"S({self.center}, 2^{self.radius_log})"


@dataclass(frozen=True)
class OuterDisk:
    """``P^1(Q_2) \\ D(0, 2^radius_log)``: all x with |x| > 2^radius_log, and infinity."""

    radius_log: int

    def __str__(self) -> str:
        return f"P1 \\ D(0, 2^{self.radius_log})"


Region = Union[Disk, Sphere, OuterDisk]


def _as_disk_or_outer(r: Region) -> Disk | OuterDisk:
    return r.as_disk() if isinstance(r, Sphere) else r


def _dist_at_most(x: Dyadic, c, radius_log: int) -> bool:
    """|x - c| <= 2^radius_log, deciding truncated x when possible."""
    k = -radius_log
    try:
        diff = x - c
    except PrecisionError:
        # difference is O(2^ap) with no known digits below ap
        if x.absolute_precision >= k:
            return True
        raise
    return diff.is_zero or diff.valuation >= k


def region_contains(region: Region, x) -> bool:
    p = as_point(x)
    if isinstance(region, Sphere):
        if p.is_infinity:
            return False
        return (
            _dist_at_most(p.value, region.center, region.radius_log)
            and not _dist_at_most(p.value, region.center, region.radius_log - 1)
        )
    if isinstance(region, OuterDisk):
        if p.is_infinity:
            return True
        if p.value.is_zero:
            return False
        return p.value.valuation < -region.radius_log
    if p.is_infinity:
        return False
    return _dist_at_most(p.value, region.center, region.radius_log)


def region_subset(inner: Region, outer: Region) -> bool:
    """Exact containment ``inner ⊆ outer``."""
    a, b = _as_disk_or_outer(inner), _as_disk_or_outer(outer)
    if isinstance(a, OuterDisk):
        return isinstance(b, OuterDisk) and a.radius_log >= b.radius_log
    if isinstance(b, OuterDisk):
        if a.contains_zero():
            return False
        # every point of a has the absolute value of its center
        return Dyadic(a.center).valuation < -b.radius_log
    return a.radius_log <= b.radius_log and _dist_at_most(
        Dyadic(a.center), b.center, b.radius_log
    )


def regions_disjoint(r1: Region, r2: Region) -> bool:
    a, b = _as_disk_or_outer(r1), _as_disk_or_outer(r2)
    if isinstance(a, OuterDisk) and isinstance(b, OuterDisk):
        return False
    if isinstance(a, OuterDisk):
        a, b = b, a
    if isinstance(b, OuterDisk):
        # a misses the outer region iff a ⊆ D(0, 2^R)
        return a.radius_log <= b.radius_log and _dist_at_most(
            Dyadic(a.center), 0, b.radius_log
        )
    # two ultrametric disks are nested or disjoint
    return not _dist_at_most(Dyadic(a.center), b.center, max(a.radius_log, b.radius_log))


def regions_intersect(r1: Region, r2: Region) -> bool:
    return not regions_disjoint(r1, r2)


def image_under_scaling(region: Disk, image_center, exponent: int) -> Disk:
    """Image of a disk under a map that multiplies distances by ``2^exponent``."""
    if isinstance(region, Sphere):
        region = region.as_disk()
    return Disk(image_center, region.radius_log + exponent)


def sample_region(region: Region, rng: random.Random, bits: int = 24) -> ProjPoint:
    """A pseudo-random point, uniform at resolution ``2^-bits`` of the region."""
    region = _as_disk_or_outer(region)
    n = rng.randrange(1 << bits)
    if isinstance(region, OuterDisk):
        if n == 0:
            return INFINITY
        # uniform in the chart w = 1/x on D(0, 2^-(R+1))
        w = Fraction(n) * Fraction(2) ** (region.radius_log + 1)
        return ProjPoint(Dyadic(1 / w))
    return ProjPoint(Dyadic(region.center + Fraction(n) * Fraction(2) ** (-region.radius_log)))


def sample_sphere_point(i: int, rng: random.Random, bits: int = 16) -> ProjPoint:
    """Random rational with |x|_2 = 2^i (odd numerator and denominator)."""
    num = rng.randrange(1 << bits) * 2 + 1
    den = rng.randrange(1 << bits) * 2 + 1
    if rng.random() < 0.5:
        num = -num
    return ProjPoint(Dyadic(Fraction(num, den) * Fraction(2) ** (-i)))


def region_to_dict(region: Region) -> dict:
    if isinstance(region, OuterDisk):
        return {"kind": "outer", "radiusLog": region.radius_log}
    kind = "sphere" if isinstance(region, Sphere) else "disk"
    return {"kind": kind, "center": str(region.center), "radiusLog": region.radius_log}


def region_from_dict(d: dict) -> Region:
    kind = d["kind"]
    if kind == "outer":
        return OuterDisk(int(d["radiusLog"]))
    center = parse_dyadic(d["center"])
    if kind == "disk":
        return Disk(center, int(d["radiusLog"]))
    if kind == "sphere":
        return Sphere(center, int(d["radiusLog"]))
    raise DyadicError(f"unknown region kind {kind!r}")
