"""Disk families, incidence matrices, itineraries and the weak-repeller check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .dyadic import DEFAULT_PRECISION, Dyadic, sqrt, sqrt_exists
from .dynamics import (
    CaseTag,
    MapParam,
    as_param,
    certified_exponent,
    classify,
    fixed_points,
    measure_exponent,
    ordered_pair,
    phi_value,
)
from .errors import (
    CaseMismatch,
    ConditionFailed,
    FamilyNotDisjoint,
    NonConstantScaling,
    PrecisionError,
)
from .geometry import (
    Disk,
    OuterDisk,
    ProjPoint,
    Region,
    Sphere,
    as_point,
    region_contains,
    region_subset,
    region_to_dict,
    regions_disjoint,
    regions_intersect,
)

FAMILY_CASES = (
    CaseTag.EXPAND_FULL_SHIFT,
    CaseTag.CONTRACT_SQRT_SMALL,
    CaseTag.CONTRACT_SQRT_QUARTER,
    CaseTag.CONTRACT_MINUS3_QUARTER,
)


# -- incidence matrices ----------------------------------------------------


@dataclass(frozen=True)
class IncidenceMatrix:
    """0/1 matrix; row and column ``k`` belong to the disk with symbol ``k + 1``."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(e) for e in r) for r in self.rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("incidence matrix must be square")
        if any(e not in (0, 1) for r in rows for e in r):
            raise ValueError("incidence matrix entries must be 0 or 1")
        object.__setattr__(self, "rows", rows)

    @property
    def size(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> int:
        """Entry for symbols ``i`` and ``j`` (1-based)."""
        return self.rows[i - 1][j - 1]

    def successors(self, i: int) -> list[int]:
        return [j + 1 for j, e in enumerate(self.rows[i - 1]) if e]

    def is_irreducible(self) -> bool:
        return is_irreducible(self)

    def admissible(self, word: Sequence[int]) -> bool:
        return admissible(self, word)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "rows": [list(r) for r in self.rows],
            "irreducible": self.is_irreducible(),
        }

    def __str__(self) -> str:
        return "\n".join(" ".join(str(e) for e in r) for r in self.rows)


def is_irreducible(A: IncidenceMatrix) -> bool:
    """Every symbol reaches every symbol along a path of positive length."""
    m = A.size
    for i in range(1, m + 1):
        seen: set[int] = set()
        frontier = A.successors(i)
        while frontier:
            j = frontier.pop()
            if j not in seen:
                seen.add(j)
                frontier.extend(A.successors(j))
        if len(seen) != m:
            return False
    return True


def admissible(A: IncidenceMatrix, word: Sequence[int]) -> bool:
    if any(not 1 <= s <= A.size for s in word):
        return False
    return all(A.entry(s, t) for s, t in zip(word, word[1:]))


def _matrix(*rows: str) -> IncidenceMatrix:
    return IncidenceMatrix(tuple(tuple(int(c) for c in r) for r in rows))


# reference matrices, one per case admitting a disk family
REFERENCE_MATRICES: dict[CaseTag, IncidenceMatrix] = {
    CaseTag.EXPAND_FULL_SHIFT: _matrix("11", "11"),
    CaseTag.CONTRACT_SQRT_SMALL: _matrix("0010", "0010", "0001", "1101"),
    CaseTag.CONTRACT_SQRT_QUARTER: _matrix("00100", "00100", "00010", "00011", "11000"),
    CaseTag.CONTRACT_MINUS3_QUARTER: _matrix("0010", "0010", "0001", "1100"),
}


# -- disk families ---------------------------------------------------------


@dataclass(frozen=True)
class DiskFamily:
    """Disjoint regions with symbols 1..m.

    ``exponents[k]`` is the expected scaling exponent of the map on region
    ``k + 1`` in the plain metric, or ``None`` where the region meets 0 or
    infinity.
    """

    disks: tuple[Region, ...]
    case: CaseTag | None = None
    exponents: tuple[int | None, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "disks", tuple(self.disks))
        if not self.exponents:
            object.__setattr__(self, "exponents", (None,) * len(self.disks))
        for i, j in itertools.combinations(range(len(self.disks)), 2):
            if not regions_disjoint(self.disks[i], self.disks[j]):
                raise FamilyNotDisjoint(
                    f"D{i + 1} = {self.disks[i]} meets D{j + 1} = {self.disks[j]}"
                )

    def __len__(self) -> int:
        return len(self.disks)

    def symbol_of(self, point) -> int | None:
        """1-based index of the region containing ``point``, if any."""
        for k, d in enumerate(self.disks):
            if region_contains(d, point):
                return k + 1
        return None

    def to_dict(self) -> dict:
        return {
            "case": None if self.case is None else self.case.value,
            "disks": [region_to_dict(d) for d in self.disks],
            "exponents": list(self.exponents),
        }


def julia_disks(a) -> DiskFamily:
    """The disk family on which phi_a is (conjugate to) a weak repeller."""
    p = as_param(a)
    case = classify(p)
    v = p.valuation
    if case == CaseTag.EXPAND_FULL_SHIFT:
        # D(x_{1,2}, 1/(4 sqrt|a|)); |phi(x)-phi(y)| = |a||x-y|/2 there
        report = fixed_points(p)
        r = v // 2 - 2
        disks = tuple(Disk(f.location.value, r) for f in report.finite)
        return DiskFamily(disks, case, (-v - 1, -v - 1))
    if case in (CaseTag.CONTRACT_SQRT_SMALL, CaseTag.CONTRACT_SQRT_QUARTER):
        c1, c2 = ordered_pair(Dyadic(1) / sqrt(-p.a, DEFAULT_PRECISION + v))
        half = v // 2
        disks: list[Region] = [
            Disk(c1, half - 2),
            Disk(c2, half - 2),
            Disk(0, -half - 3),
            OuterDisk(half + 2),
        ]
        exps: list[int | None] = [-v - 1, -v - 1, None, None]
        if case == CaseTag.CONTRACT_SQRT_QUARTER:
            disks.append(Sphere(0, half + 2))
            exps.append(-v)
        return DiskFamily(tuple(disks), case, tuple(exps))
    if case == CaseTag.CONTRACT_MINUS3_QUARTER:
        disks = (
            Disk(Fraction(1, 2), -1),
            Disk(Fraction(-1, 2), -1),
            Disk(8, -4),
            Disk(Fraction(1, 8), 2),
        )
        return DiskFamily(disks, case, (-3, -3, 6, -2))
    raise CaseMismatch(f"no disk family for case {case}")


# -- images of regions -----------------------------------------------------


def region_image(a, region: Region) -> Region:
    """phi_a(region), decided analytically.

    Handles disks avoiding 0 (constant scaling certified), disks centered
    at 0 on which |1/x| dominates, and outer regions on which |a x|
    dominates.  Anything else raises :class:`NonConstantScaling`.
    """
    p = as_param(a)
    if isinstance(region, Sphere):
        region = region.as_disk()
    if isinstance(region, OuterDisk):
        R = region.radius_log
        if -p.valuation + 2 * R + 2 > 0:
            return OuterDisk(R - p.valuation)
        raise NonConstantScaling(f"|a x| does not dominate on {region}")
    if region.contains_zero():
        r = region.radius_log
        if -p.valuation + 2 * r < 0:
            return OuterDisk(-r - 1)
        raise NonConstantScaling(f"|1/x| does not dominate on {region}")
    g = certified_exponent(p, region)
    return Disk(phi_value(p.a, Dyadic(region.center)), region.radius_log + g)


def incidence_from_family(
    image: Callable[[Region], Region],
    family: DiskFamily | Sequence[Region],
    check_intersection: bool = True,
) -> IncidenceMatrix:
    """A[i][j] = 1 iff D_j is contained in image(D_i).

    With ``check_intersection`` any D_j that meets image(D_i) without
    being contained in it raises, since the coding then breaks down.
    """
    disks = family.disks if isinstance(family, DiskFamily) else tuple(family)
    rows = []
    for i, d in enumerate(disks):
        img = image(d)
        row = []
        for j, e in enumerate(disks):
            inside = region_subset(e, img)
            if check_intersection and not inside and regions_intersect(e, img):
                raise ValueError(f"image of D{i + 1} meets D{j + 1} without containing it")
            row.append(int(inside))
        rows.append(tuple(row))
    return IncidenceMatrix(tuple(rows))


def incidence_matrix(a) -> IncidenceMatrix:
    p = as_param(a)
    return incidence_from_family(lambda r: region_image(p, r), julia_disks(p))


def reference_matrix(a) -> IncidenceMatrix:
    case = classify(a)
    if case not in REFERENCE_MATRICES:
        raise CaseMismatch(f"no reference matrix for case {case}")
    return REFERENCE_MATRICES[case]


# -- itineraries -----------------------------------------------------------


@dataclass(frozen=True)
class Itinerary:
    symbols: tuple[int, ...]
    requested: int

    @property
    def certified_length(self) -> int:
        return len(self.symbols)

    @property
    def complete(self) -> bool:
        return len(self.symbols) == self.requested

    def to_dict(self) -> dict:
        return {
            "symbols": list(self.symbols),
            "certifiedLength": self.certified_length,
            "requested": self.requested,
        }


def _orbit_values(
    p: MapParam, x: Dyadic | None, n: int, max_bits: int, precision: int
) -> Iterable[Dyadic | None]:
    for t in range(n):
        yield x
        if t == n - 1:
            return
        if x is not None and x.is_exact:
            q = x.fraction
            if max(q.numerator.bit_length(), q.denominator.bit_length()) > max_bits:
                x = x.to_approx(precision)
        x = phi_value(p.a, x)


def itinerary(
    a,
    point,
    n: int,
    family: DiskFamily | None = None,
    max_bits: int = 1 << 14,
    precision: int = 256,
) -> Itinerary:
    """Symbols of the regions visited by x, phi(x), ..., phi^(n-1)(x).

    Stops early when an iterate leaves the family, or when a truncated
    iterate no longer determines its region.
    """
    p = as_param(a)
    fam = family if family is not None else julia_disks(p)
    symbols = []
    try:
        for x in _orbit_values(p, as_point(point).value, n, max_bits, precision):
            s = fam.symbol_of(ProjPoint(x))
            if s is None:
                break
            symbols.append(s)
    except PrecisionError:
        pass
    return Itinerary(tuple(symbols), n)


@dataclass
class ConjugacyReport:
    checked: int = 0
    survived: int = 0
    shift_violations: list[dict] = field(default_factory=list)
    inadmissible: list[dict] = field(default_factory=list)
    separation_pairs: int = 0
    separation_violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.shift_violations or self.inadmissible or self.separation_violations)

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "survived": self.survived,
            "shiftViolations": self.shift_violations,
            "inadmissible": self.inadmissible,
            "separationPairs": self.separation_pairs,
            "separationViolations": self.separation_violations,
            "ok": self.ok,
        }


def cylinder_radius_log(family: DiskFamily, word: Sequence[int]) -> int | None:
    """log2 bound on the diameter of the cylinder of ``word`` (finite disks only)."""
    last = family.disks[word[-1] - 1]
    if not isinstance(last, (Disk, Sphere)):
        return None
    r = last.as_disk().radius_log if isinstance(last, Sphere) else last.radius_log
    for s in word[:-1]:
        g = family.exponents[s - 1]
        if g is None:
            return None
        r -= g
    return r


def verify_conjugacy(a, samples: Iterable, n: int, **kw) -> ConjugacyReport:
    """Check h(phi(x)) = shift(h(x)) and cylinder separation on samples."""
    p = as_param(a)
    fam = julia_disks(p)
    A = incidence_matrix(p)
    report = ConjugacyReport()
    by_word: dict[tuple[int, ...], list[Dyadic]] = {}
    for sample in samples:
        pt = as_point(sample)
        report.checked += 1
        h = itinerary(p, pt, n, fam, **kw)
        if not A.admissible(h.symbols):
            report.inadmissible.append({"point": pt.literal(), "symbols": list(h.symbols)})
        if not h.complete:
            continue
        report.survived += 1
        h1 = itinerary(p, ProjPoint(phi_value(p.a, pt.value)), n - 1, fam, **kw)
        if h1.symbols != h.symbols[1:]:
            report.shift_violations.append(
                {"point": pt.literal(), "h": list(h.symbols), "hImage": list(h1.symbols)}
            )
        if pt.value is not None:
            by_word.setdefault(h.symbols, []).append(pt.value)
    for word, pts in sorted(by_word.items()):
        bound = cylinder_radius_log(fam, word)
        if bound is None:
            continue
        for x, y in itertools.combinations(pts, 2):
            report.separation_pairs += 1
            d = x - y
            if not d.is_zero and -d.valuation > bound:
                report.separation_violations.append(
                    {"word": list(word), "x": x.literal(), "y": y.literal()}
                )
    return report


# -- cylinder realization -------------------------------------------------


def _preimage_center(p: MapParam, y: Fraction, target: Disk, precision: int) -> Dyadic:
    # solve a x^2 - y x + 1 = 0 and keep the root lying in ``target``
    disc = Dyadic(y * y - 4 * p.a.fraction)
    if disc.is_zero:
        roots = [Dyadic(y / (2 * p.a.fraction))]
    elif not sqrt_exists(disc):
        raise ArithmeticError(f"phi^-1({y}) is not in Q_2")
    else:
        s = sqrt(disc, precision)
        roots = [(Dyadic(y) + s) / (2 * p.a), (Dyadic(y) - s) / (2 * p.a)]
    for x in roots:
        if region_contains(target, ProjPoint(x)):
            return x
    raise ArithmeticError(f"no preimage of {y} in {target}")


def realize_word(a, word: Sequence[int], precision: int | None = None) -> Fraction:
    """A rational point whose itinerary starts with ``word``.

    The cylinder is built backwards: each step pulls the current disk back
    through the scaling bijection of phi on the previous family disk, whose
    center is a root of a x^2 - y x + 1 = 0.
    """
    p = as_param(a)
    fam = julia_disks(p)
    if not p.a.is_exact:
        raise CaseMismatch("cylinder realization needs an exact parameter")
    if any(not isinstance(d, Disk) or d.contains_zero() for d in fam.disks):
        raise CaseMismatch("cylinder realization needs finite disks avoiding 0")
    A = incidence_matrix(p)
    if not word or not A.admissible(word):
        raise ValueError(f"word {list(word)} is not admissible")
    if precision is None:
        precision = DEFAULT_PRECISION + 4 * len(word) * max(abs(g) for g in fam.exponents)
    current = fam.disks[word[-1] - 1].canonical()
    for s in reversed(word[:-1]):
        dom = fam.disks[s - 1]
        g = certified_exponent(p, dom)
        center = _preimage_center(p, current.center, dom, precision)
        current = Disk(center, current.radius_log - g).canonical()
    return current.center


def realize_all_words(a, n: int) -> dict[tuple[int, ...], Fraction]:
    """One verified point per admissible word of length ``n``."""
    p = as_param(a)
    fam = julia_disks(p)
    A = incidence_matrix(p)
    out = {}
    for word in itertools.product(range(1, len(fam) + 1), repeat=n):
        if not A.admissible(word):
            continue
        x = realize_word(p, word)
        h = itinerary(p, x, n, fam)
        if h.symbols != word:
            raise ArithmeticError(f"point {x} realizes {h.symbols}, not {word}")
        out[word] = x
    return out


# -- generalized weak repeller --------------------------------------------


@dataclass
class RepellerReport:
    exponents: tuple[int, ...]
    images: tuple[Disk, ...]
    condition_i: bool
    condition_ii: bool
    strict: tuple[tuple[int, int], ...]
    intersection_is_containment: bool
    matrix: IncidenceMatrix
    transitive: bool
    tau: int
    rescalings: tuple[dict, ...]
    classic: bool

    def to_dict(self) -> dict:
        return {
            "exponents": list(self.exponents),
            "images": [region_to_dict(d) for d in self.images],
            "conditionI": self.condition_i,
            "conditionII": self.condition_ii,
            "strict": [list(s) for s in self.strict],
            "intersectionIsContainment": self.intersection_is_containment,
            "matrix": self.matrix.to_dict(),
            "transitive": self.transitive,
            "tau": self.tau,
            "rescalings": list(self.rescalings),
            "classic": self.classic,
        }


def check_weak_repeller(
    f: Callable[[Dyadic], Dyadic],
    disks: Sequence[Disk],
    sample_pairs: int = 64,
    seed: int = 0,
) -> RepellerReport:
    """Audit conditions (i) and (ii) of a generalized weak repeller.

    Exponents are measured on random pairs; each image is the disk
    ``D(f(c_i), 2^(r_i + g_i))``.  Also reports the uniformizing radius
    ``tau = max tau_i`` (disk i has radius 2^-tau_i) and the affine maps
    ``x -> c_i + 2^(tau - tau_i)(x - c_i)`` that bring every disk to it.
    """
    disks = tuple(d.as_disk() if isinstance(d, Sphere) else d for d in disks)
    if any(not isinstance(d, Disk) for d in disks):
        raise TypeError("weak-repeller families consist of finite disks")
    DiskFamily(disks)  # disjointness
    exps = tuple(
        measure_exponent(f, d, sample_pairs, seed + k) for k, d in enumerate(disks)
    )
    images = tuple(
        Disk(f(Dyadic(d.center)), d.radius_log + g) for d, g in zip(disks, exps)
    )
    rows, strict = [], []
    agree = True
    for i, img in enumerate(images):
        row = []
        for j, d in enumerate(disks):
            inside = region_subset(d, img)
            agree &= inside == regions_intersect(d, img)
            row.append(int(inside))
            if inside and img.radius_log > d.radius_log:
                strict.append((i + 1, j + 1))
        if not any(row):
            raise ConditionFailed("i", i + 1, f"f(D{i + 1}) = {img} contains no family disk")
        rows.append(tuple(row))
    if not strict:
        raise ConditionFailed("ii", None, "no image strictly contains a family disk")
    A = IncidenceMatrix(tuple(rows))
    taus = [-d.radius_log for d in disks]
    tau = max(taus)
    rescalings = tuple(
        {"index": k + 1, "center": str(d.center), "factorLog": t - tau}
        for k, (d, t) in enumerate(zip(disks, taus))
    )
    classic = len(set(taus)) == 1 and all(g >= 0 for g in exps) and any(g > 0 for g in exps)
    return RepellerReport(
        exponents=exps,
        images=images,
        condition_i=True,
        condition_ii=True,
        strict=tuple(strict),
        intersection_is_containment=agree,
        matrix=A,
        transitive=A.is_irreducible(),
        tau=tau,
        rescalings=rescalings,
        classic=classic,
    )


def phi_map(a) -> Callable[[Dyadic], Dyadic]:
    p = as_param(a)

    def f(x: Dyadic) -> Dyadic:
        y = phi_value(p.a, x)
        if y is None:
            raise NonConstantScaling("orbit reached infinity")
        return y

    return f


@dataclass(frozen=True)
class Conjugated:
    """phi conjugated by g(x) = 1/(x - pole), mapping the family into finite disks."""

    param: MapParam
    pole: Fraction

    def g(self, x: Dyadic | None) -> Dyadic | None:
        if x is None:
            return Dyadic(0)
        d = x - Dyadic(self.pole)
        return None if d.is_zero else Dyadic(1) / d

    def g_inv(self, y: Dyadic | None) -> Dyadic | None:
        if y is None:
            return Dyadic(self.pole)
        if y.is_zero:
            return None
        return Dyadic(self.pole) + Dyadic(1) / y

    def psi(self, y: Dyadic) -> Dyadic:
        z = self.g(phi_value(self.param.a, self.g_inv(y)))
        if z is None:
            raise NonConstantScaling("psi has a pole here")
        return z

    def region(self, region: Region) -> Disk:
        """g(region) for family regions avoiding the pole."""
        if isinstance(region, OuterDisk):
            if Dyadic(self.pole).valuation <= -region.radius_log:
                raise ValueError("pole lies in the outer region")
            return Disk(0, -region.radius_log - 1)
        d = region.as_disk() if isinstance(region, Sphere) else region
        shift = Dyadic(d.center) - Dyadic(self.pole)
        if shift.is_zero or shift.valuation >= -d.radius_log:
            raise ValueError(f"pole lies in {d}")
        return Disk(self.g(Dyadic(d.center)), d.radius_log + 2 * shift.valuation)


def conjugated_family(a) -> tuple[Conjugated, tuple[Disk, ...]]:
    """For the square-root cases: psi = g phi g^-1 and g(D_1), ..., g(D_m)."""
    p = as_param(a)
    if classify(p) not in (CaseTag.CONTRACT_SQRT_SMALL, CaseTag.CONTRACT_SQRT_QUARTER):
        raise CaseMismatch("the conjugated family is built for the square-root cases")
    conj = Conjugated(p, Fraction(2) ** (p.valuation // 2 - 1))
    return conj, tuple(conj.region(d) for d in julia_disks(p).disks)


def check_conjugated_repeller(a, sample_pairs: int = 64, seed: int = 0) -> RepellerReport:
    conj, disks = conjugated_family(a)
    return check_weak_repeller(conj.psi, disks, sample_pairs, seed)
