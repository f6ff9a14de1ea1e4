"""Julia/Fatou verdicts, per-case Julia set descriptions and sphere routing."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterator

from .dyadic import DEFAULT_PRECISION, Dyadic
from .dynamics import (
    CaseTag,
    MapParam,
    as_param,
    classify,
    in_xa,
    phi_value,
)
from .errors import CaseMismatch, PrecisionError, RoutingViolation
from .geometry import (
    ProjPoint,
    Sphere,
    as_point,
    region_to_dict,
    sample_sphere_point,
    spherical_distance,
)
from .symbolic import DiskFamily, IncidenceMatrix, incidence_matrix, julia_disks


class Status(str, enum.Enum):
    JULIA = "Julia"
    FATOU = "Fatou"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


class Certificate(str, enum.Enum):
    VALUATION_PARITY = "ValuationParity"
    TWO_POINT_SET = "TwoPointSet"
    ENTERED_XA = "EnteredXa"
    ESCAPE_CERTIFIED = "EscapeCertified"
    CYCLE_IN_REPELLER = "CycleInRepeller"
    WHOLE_SPACE_FATOU = "WholeSpaceFatou"
    BUDGET_EXHAUSTED = "BudgetExhausted"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Verdict:
    status: Status
    certificate: Certificate
    step: int | None = None
    period: int | None = None

    def __post_init__(self):
        if self.status != Status.UNKNOWN and self.certificate == Certificate.BUDGET_EXHAUSTED:
            raise ValueError("a definite verdict needs a real certificate")

    def to_dict(self) -> dict:
        d: dict = {"status": self.status.value, "certificate": self.certificate.value}
        if self.step is not None:
            d["step"] = self.step
        if self.period is not None:
            d["period"] = self.period
        return d

    def __str__(self) -> str:
        extra = []
        if self.step is not None:
            extra.append(f"step {self.step}")
        if self.period is not None:
            extra.append(f"period {self.period}")
        tail = f" ({', '.join(extra)})" if extra else ""
        return f"{self.status.value}: {self.certificate.value}{tail}"


def _walk(
    p: MapParam, x: Dyadic | None, budget: int, max_bits: int, precision: int
) -> Iterator[tuple[int, Dyadic | None, bool]]:
    """(n, phi^n(x), exact?) for n = 0..budget; truncates past ``max_bits``."""
    for n in range(budget + 1):
        if x is not None and x.is_exact:
            q = x.fraction
            if max(q.numerator.bit_length(), q.denominator.bit_length()) > max_bits:
                x = x.to_approx(precision)
        yield n, x, x is None or x.is_exact
        if n < budget:
            x = phi_value(p.a, x)


def _iterate_verdict(p: MapParam, x, budget, leaves, fatou_cert, max_bits, precision):
    # Fatou as soon as ``leaves`` fires, Julia on an exact cycle that never did
    seen: dict = {}
    try:
        for n, y, exact in _walk(p, x, budget, max_bits, precision):
            if leaves(y):
                return Verdict(Status.FATOU, fatou_cert, step=n)
            if exact:
                key = None if y is None else y.fraction
                if key in seen:
                    return Verdict(
                        Status.JULIA, Certificate.CYCLE_IN_REPELLER, period=n - seen[key]
                    )
                seen[key] = n
    except PrecisionError:
        pass
    return Verdict(Status.UNKNOWN, Certificate.BUDGET_EXHAUSTED)


def julia_verdict(
    a,
    point,
    budget: int = 200,
    max_bits: int = 1 << 14,
    precision: int = DEFAULT_PRECISION,
) -> Verdict:
    """Decide whether ``point`` lies in the Julia set of phi_a.

    Cases with an explicit Julia set answer at once; the others iterate for
    at most ``budget`` steps and return ``Unknown`` if nothing certifies.
    """
    p = as_param(a)
    x = as_point(point).value
    case = classify(p)
    if case in (CaseTag.GOOD_REDUCTION, CaseTag.EXPAND_NO_SQRT):
        return Verdict(Status.FATOU, Certificate.WHOLE_SPACE_FATOU)
    if case in (CaseTag.CONTRACT_MINUS3_QUARTER, CaseTag.CONTRACT_OTHER):
        if x is None or x.is_zero:
            return Verdict(Status.JULIA, Certificate.TWO_POINT_SET)
        if case == CaseTag.CONTRACT_OTHER:
            return Verdict(Status.FATOU, Certificate.WHOLE_SPACE_FATOU)
        if x.valuation % 2:
            return Verdict(Status.JULIA, Certificate.VALUATION_PARITY)
        return Verdict(Status.FATOU, Certificate.VALUATION_PARITY)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if case == CaseTag.EXPAND_FULL_SHIFT:
        level = -(p.valuation // 2)  # valuation of points on S(0, 1/sqrt|a|)

        def leaves(y):
            return y is None or y.is_zero or y.valuation != level

        return _iterate_verdict(
            p, x, budget, leaves, Certificate.ESCAPE_CERTIFIED, max_bits, precision
        )
    return _iterate_verdict(
        p, x, budget, lambda y: in_xa(p, ProjPoint(y)), Certificate.ENTERED_XA,
        max_bits, precision,
    )


# -- descriptions ----------------------------------------------------------


class PayloadKind(str, enum.Enum):
    EMPTY_JULIA = "EmptyJulia"
    ALL_TO_INFINITY = "AllToInfinity"
    CANTOR_FULL_SHIFT = "CantorFullShift"
    SUBSHIFT_KFX = "SubshiftKFX"
    ODD_SPHERES = "OddSpheres"
    TWO_POINTS = "TwoPoints"

    def __str__(self) -> str:
        return self.value


PAYLOAD_OF_CASE = {
    CaseTag.GOOD_REDUCTION: PayloadKind.EMPTY_JULIA,
    CaseTag.EXPAND_NO_SQRT: PayloadKind.ALL_TO_INFINITY,
    CaseTag.EXPAND_FULL_SHIFT: PayloadKind.CANTOR_FULL_SHIFT,
    CaseTag.CONTRACT_SQRT_SMALL: PayloadKind.SUBSHIFT_KFX,
    CaseTag.CONTRACT_SQRT_QUARTER: PayloadKind.SUBSHIFT_KFX,
    CaseTag.CONTRACT_MINUS3_QUARTER: PayloadKind.ODD_SPHERES,
    CaseTag.CONTRACT_OTHER: PayloadKind.TWO_POINTS,
}

ODD_SPHERE_ROUTING = (
    "phi^(k-1)(x) in S(0,2^3) if x in S(0,2^(2k+1)); "
    "phi^k(x) in S(0,2^3) if x in S(0,2^-(2k+1))"
)


@dataclass(frozen=True)
class JuliaDescription:
    case: CaseTag
    kind: PayloadKind
    family: DiskFamily | None = None
    matrix: IncidenceMatrix | None = None
    core: tuple[Sphere, ...] = ()
    routing: str | None = None

    def to_dict(self) -> dict:
        d: dict = {"case": self.case.value, "kind": self.kind.value}
        if self.family is not None:
            d["family"] = self.family.to_dict()
        if self.matrix is not None:
            d["matrix"] = self.matrix.to_dict()
        if self.core:
            d["core"] = [region_to_dict(s) for s in self.core]
        if self.routing is not None:
            d["routing"] = self.routing
        return d


def julia_description(a) -> JuliaDescription:
    p = as_param(a)
    case = classify(p)
    kind = PAYLOAD_OF_CASE[case]
    if kind in (PayloadKind.CANTOR_FULL_SHIFT, PayloadKind.SUBSHIFT_KFX):
        return JuliaDescription(case, kind, julia_disks(p), incidence_matrix(p))
    if kind == PayloadKind.ODD_SPHERES:
        return JuliaDescription(
            case,
            kind,
            julia_disks(p),
            incidence_matrix(p),
            core=(Sphere(0, 3), Sphere(0, -3), Sphere(0, 1)),
            routing=ODD_SPHERE_ROUTING,
        )
    return JuliaDescription(case, kind)


# -- sphere routing --------------------------------------------------------


def sphere_level(x: Dyadic | None) -> int | None:
    """``i`` with x in S(0, 2^i); ``None`` for 0 and infinity."""
    if x is None or x.is_zero:
        return None
    return -x.valuation


def predicted_entry_step(a, i: int) -> int:
    """Steps from S(0, 2^i) into X_a by the sphere laws, for ContractOther.

    |phi(x)| = |a||x| above S(0, 1/sqrt|a|), |phi(x)| = 1/|x| strictly
    below it, and S(0, 1/sqrt|a|) itself reaches X_a after three steps.
    """
    p = as_param(a)
    v = p.valuation
    steps = 0
    while 2 * abs(i) >= v:
        if 2 * i > v:
            i -= v
            steps += 1
        elif 2 * i == v:
            return steps + 3
        else:
            i = -i
            steps += 1
    return steps


@dataclass
class RoutingReport:
    case: CaseTag
    checked: int = 0
    skipped_in_xa: int = 0
    max_steps: int = 0

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "checked": self.checked,
            "skippedInXa": self.skipped_in_xa,
            "maxSteps": self.max_steps,
            "ok": True,
        }


def _iterate_exact(p: MapParam, x: Dyadic, n: int) -> Dyadic | None:
    for _ in range(n):
        x = phi_value(p.a, x)
        if x is None:
            return None
    return x


def verify_routing(
    a, kmax: int, samples_per_sphere: int = 10, seed: int = 0, linger: int = 2
) -> RoutingReport:
    """Check the sphere routing laws on seeded samples.

    ContractMinus3Quarter: points of S(0, 2^(2k+1)) reach S(0, 8) after k-1
    steps and points of S(0, 2^-(2k+1)) after k steps, for k = 1..kmax.
    ContractOther: points of S(0, 2^i), |i| <= kmax, enter X_a within the
    step count predicted by the sphere laws and stay for ``linger`` more steps.
    """
    p = as_param(a)
    case = classify(p)
    rng = random.Random(seed)
    report = RoutingReport(case)
    if case == CaseTag.CONTRACT_MINUS3_QUARTER:
        for k in range(1, kmax + 1):
            for i, steps in ((2 * k + 1, k - 1), (-(2 * k + 1), k)):
                for _ in range(samples_per_sphere):
                    x = sample_sphere_point(i, rng).value
                    y = _iterate_exact(p, x, steps)
                    report.checked += 1
                    report.max_steps = max(report.max_steps, steps)
                    if sphere_level(y) != 3:
                        raise RoutingViolation(
                            f"phi^{steps} of a point of S(0,2^{i}) is not in S(0,2^3)",
                            {"x": x.literal(), "k": k, "steps": steps,
                             "image": None if y is None else y.literal()},
                        )
        return report
    if case != CaseTag.CONTRACT_OTHER:
        raise CaseMismatch(f"routing is checked for the odd-sphere and residual cases, not {case}")
    for i in range(-kmax, kmax + 1):
        for _ in range(samples_per_sphere):
            x = sample_sphere_point(i, rng).value
            if in_xa(p, ProjPoint(x)):
                report.skipped_in_xa += 1
                continue
            bound = predicted_entry_step(p, i)
            y, entered = x, None
            for n in range(1, bound + linger + 1):
                y = phi_value(p.a, y)
                inside = in_xa(p, ProjPoint(y))
                if entered is None and inside:
                    entered = n
                elif entered is not None and not inside:
                    raise RoutingViolation(
                        "orbit left X_a", {"x": x.literal(), "step": n}
                    )
            if entered is None or entered > bound:
                raise RoutingViolation(
                    f"orbit of a point of S(0,2^{i}) missed X_a within {bound} steps",
                    {"x": x.literal(), "bound": bound, "entered": entered},
                )
            report.checked += 1
            report.max_steps = max(report.max_steps, entered)
    return report


# -- sphere laws -----------------------------------------------------------


@dataclass
class SphereLawReport:
    large_sphere_pairs: int = 0
    inner_sphere_pairs: int = 0
    lipschitz_pairs: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "largeSpherePairs": self.large_sphere_pairs,
            "innerSpherePairs": self.inner_sphere_pairs,
            "lipschitzPairs": self.lipschitz_pairs,
            "failures": self.failures,
            "ok": self.ok,
        }


def _distinct_pair(sampler) -> tuple[Dyadic, Dyadic]:
    while True:
        x, y = sampler(), sampler()
        if x != y:
            return x, y


def check_sphere_laws(a, pairs: int = 100, seed: int = 0, span: int = 6) -> SphereLawReport:
    """Sphere image laws and the 1-Lipschitz property of phi^2 on sampled pairs.

    For |i| <= span: on S(0,2^i) with i > v(a)/2 distances scale by |a| and
    the image sphere is S(0, |a| 2^i); for i <= 0 they scale by 2^(-2i) and
    the image is S(0, 2^-i).  For |i| <= floor((v(a)-1)/2), phi maps
    S(0,2^i) into S(0,2^-i) and phi^2 does not increase distances on
    S(0,2^i) u S(0,2^-i), in both the plain and spherical metric.
    """
    p = as_param(a)
    v = p.valuation
    if v <= 0:
        raise CaseMismatch("sphere laws are stated for |a| < 1")
    rng = random.Random(seed)
    report = SphereLawReport()

    def fail(law: str, **witness):
        report.failures.append({"law": law, **{k: str(w) for k, w in witness.items()}})

    for i in range(-span, span + 1):
        if 2 * i > v:
            expected_scale, expected_level = -v, i - v
        elif i <= 0:
            expected_scale, expected_level = -2 * i, -i
        else:
            continue
        for _ in range(pairs):
            x, y = _distinct_pair(lambda: sample_sphere_point(i, rng).value)
            fx, fy = phi_value(p.a, x), phi_value(p.a, y)
            got = (x - y).valuation - (fx - fy).valuation
            if got != expected_scale:
                fail("scaling", i=i, x=x.literal(), y=y.literal())
            if sphere_level(fx) != expected_level:
                fail("image", i=i, x=x.literal())
            if i <= 0:
                report.inner_sphere_pairs += 1
            else:
                report.large_sphere_pairs += 1
    m = (v - 1) // 2
    for i in range(0, m + 1):
        def pick():
            return sample_sphere_point(i if rng.random() < 0.5 else -i, rng).value

        for _ in range(pairs):
            x, y = _distinct_pair(pick)
            for z in (x, y):
                if sphere_level(phi_value(p.a, z)) != -sphere_level(z):
                    fail("inner image", i=i, x=z.literal())
            fx2 = phi_value(p.a, phi_value(p.a, x))
            fy2 = phi_value(p.a, phi_value(p.a, y))
            if (fx2 - fy2).abs2() > (x - y).abs2():
                fail("lipschitz", i=i, x=x.literal(), y=y.literal())
            if spherical_distance(fx2, fy2) > spherical_distance(x, y):
                fail("lipschitz rho", i=i, x=x.literal(), y=y.literal())
            report.lipschitz_pairs += 1
    return report
