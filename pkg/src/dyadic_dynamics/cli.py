"""Command-line front end: ``dyadic-dyn <command> --a <literal> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from typing import Callable

from .analysis import (
    check_sphere_laws,
    julia_description,
    julia_verdict,
    verify_routing,
)
from .dyadic import DEFAULT_PRECISION
from .dynamics import (
    CaseTag,
    MapParam,
    classify,
    fixed_points,
    orbit,
)
from .errors import (
    CaseMismatch,
    ConditionFailed,
    DyadicError,
    PrecisionError,
    RoutingViolation,
)
from .geometry import ProjPoint, parse_point, sample_region
from .levels import finite_level_dynamics
from .symbolic import (
    incidence_matrix,
    itinerary,
    julia_disks,
    reference_matrix,
    verify_conjugacy,
)

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_CONSISTENCY = 0, 2, 3, 4
PREC_ENV = "DYADIC_DYN_PREC"


class Consistency(Exception):
    """A computed object disagrees with what the theory predicts."""

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload


class Output:
    def __init__(self, text: str, data: dict, rows: list[list] | None = None, code: int = 0):
        self.text = text
        self.data = data
        self.rows = rows
        self.code = code

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.data, separators=(",", ":"))
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            for row in self.rows or [[k, json.dumps(v, separators=(",", ":"))]
                                     for k, v in self.data.items()]:
                writer.writerow(row)
            return buf.getvalue().rstrip("\n")
        return self.text


def _default_precision() -> int:
    env = os.environ.get(PREC_ENV)
    if env is None:
        return DEFAULT_PRECISION
    try:
        value = int(env)
    except ValueError:
        raise DyadicError(f"{PREC_ENV} must be a positive integer, got {env!r}") from None
    if value < 1:
        raise DyadicError(f"{PREC_ENV} must be a positive integer, got {env!r}")
    return value


# -- commands --------------------------------------------------------------


def cmd_classify(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    case = classify(p)
    report = fixed_points(p, args.prec)
    inf = report.infinity
    if report.finite:
        f = report.finite[0]
        head = (
            f"fixed points ±{f.location.literal()} {f.kind.value} "
            f"(|2a−1|₂ = {f.multiplier.abs2()})"
        )
    else:
        head = "no finite fixed points"
    text = f"{case.value}; {head}; ∞ {inf.kind.value}"
    data = {"a": p.literal(), "case": case.value, **report.to_dict()}
    rows = [["location", "multiplier", "multiplierAbs", "type"]] + [
        [f.location.literal(), f.multiplier.literal(), str(f.multiplier.abs2()), f.kind.value]
        for f in report.points
    ]
    return Output(text, data, rows)


def cmd_orbit(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    x = parse_point(args.x, args.prec)
    o = orbit(p, x, args.steps, mode=args.mode, precision=args.prec)
    data = o.to_dict()
    lines = []
    rows = [["step", "point", "valuation", "rhoInf", "events"]]
    for s in data["steps"]:
        ev = " ".join(s["events"])
        lines.append(
            f"{s['step']}: {s['point']}  v={s['valuation']}  rho(.,inf)={s['rhoInf']}"
            + (f"  [{ev}]" if ev else "")
        )
        rows.append([s["step"], s["point"], s["valuation"], s["rhoInf"], ev])
    # an event past the last recorded point (precision ran out computing it)
    for e in data["events"]:
        if e["step"] >= len(data["steps"]):
            lines.append(f"{e['step']}: [{e['kind']}]")
    exhausted = any(e.kind.value == "PrecisionExhausted" for e in o.events)
    return Output("\n".join(lines), data, rows, EXIT_PRECISION if exhausted else EXIT_OK)


def cmd_julia(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    x = parse_point(args.x, args.prec)
    v = julia_verdict(p, x, args.budget, precision=args.prec)
    d = v.to_dict()
    rows = [list(d.keys()), list(d.values())]
    return Output(str(v), d, rows)


def cmd_itinerary(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    x = parse_point(args.x, args.prec)
    h = itinerary(p, x, args.steps)
    text = ",".join(map(str, h.symbols))
    if not h.complete:
        text += f"  (left the family after {h.certified_length} steps)"
    return Output(text, h.to_dict(), [["step", "symbol"]] + [[t, s] for t, s in enumerate(h.symbols)])


def _checked_matrix(p: MapParam):
    A = incidence_matrix(p)
    ref = reference_matrix(p)
    if A != ref:
        raise Consistency(
            f"computed matrix\n{A}\ndiffers from the reference matrix\n{ref}",
            {"computed": A.to_dict(), "reference": ref.to_dict()},
        )
    return A


def cmd_matrix(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    A = _checked_matrix(p)
    text = f"{A}\nirreducible: {str(A.is_irreducible()).lower()}"
    return Output(text, A.to_dict(), [list(r) for r in A.rows])


def cmd_routing(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    r = verify_routing(p, args.kmax, args.samples, args.seed)
    d = r.to_dict()
    text = (
        f"{d['case']}: routing holds on {d['checked']} samples "
        f"(max {d['maxSteps']} steps, {d['skippedInXa']} already in X_a)"
    )
    return Output(text, d, [list(d.keys()), list(d.values())])


def cmd_levels(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    L = finite_level_dynamics(p, args.level)
    d = L.to_dict()
    lines = [f"level {L.level}: {L.state_count} states, {len(L.cycles)} cycles"]
    rows = [["cycle", "length", "depth", "members"]]
    for k, c in enumerate(d["cycles"]):
        lines.append(f"  cycle {k + 1}: length {c['length']}, depth {c['depth']}")
        rows.append([k + 1, c["length"], c["depth"], " ".join(c["members"])])
    return Output("\n".join(lines), d, rows)


def _spot_samples(p: MapParam, count: int, seed: int) -> list[ProjPoint]:
    fam = julia_disks(p)
    rng = random.Random(seed)
    return [sample_region(fam.disks[k % len(fam)], rng) for k in range(count)]


def cmd_report(args) -> Output:
    p = MapParam.parse(args.a, args.prec)
    case = classify(p)
    cls = cmd_classify(args)
    desc = julia_description(p)
    data: dict = {"a": p.literal(), "case": case.value, "classify": cls.data,
                  "description": desc.to_dict()}
    lines = [cls.text, f"Julia set: {desc.kind.value}"]
    failures = []
    if desc.matrix is not None:
        try:
            A = _checked_matrix(p)
            data["matrixMatchesReference"] = True
            lines.append(f"incidence matrix (matches reference):\n{A}")
        except Consistency as exc:
            data["matrixMatchesReference"] = False
            failures.append(str(exc))
        samples = _spot_samples(p, args.samples, args.seed)
        rep = verify_conjugacy(p, samples, args.steps)
        data["conjugacy"] = rep.to_dict()
        lines.append(
            f"conjugacy spot-check: {rep.survived}/{rep.checked} samples survive "
            f"{args.steps} steps, {len(rep.shift_violations)} shift violations"
        )
        if not rep.ok:
            failures.append("conjugacy spot-check failed")
    if case in (CaseTag.CONTRACT_MINUS3_QUARTER, CaseTag.CONTRACT_OTHER):
        r = verify_routing(p, args.kmax, args.samples, args.seed)
        data["routing"] = r.to_dict()
        lines.append(f"routing: holds on {r.checked} samples")
    if p.valuation > 0:
        laws = check_sphere_laws(p, pairs=args.samples, seed=args.seed)
        data["sphereLaws"] = laws.to_dict()
        lines.append(f"sphere laws: {'hold' if laws.ok else 'FAIL'}")
        if not laws.ok:
            failures.append("sphere laws failed")
    if case == CaseTag.GOOD_REDUCTION:
        L = finite_level_dynamics(p, args.level)
        data["levels"] = L.to_dict(adjacency=False)
        lines.append(f"level {L.level}: {L.state_count} states, {len(L.cycles)} cycles")
    out = Output("\n".join(lines), data)
    if failures:
        raise Consistency("; ".join(failures), data)
    return out


COMMANDS: dict[str, Callable] = {
    "classify": cmd_classify,
    "orbit": cmd_orbit,
    "julia": cmd_julia,
    "itinerary": cmd_itinerary,
    "matrix": cmd_matrix,
    "routing": cmd_routing,
    "levels": cmd_levels,
    "report": cmd_report,
}


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadic-dyn",
        description="2-adic dynamics of phi_a(x) = a x + 1/x on the projective line.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    needs_x = {"orbit", "julia", "itinerary"}
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--a", required=True, help="parameter literal, e.g. -5/4 or 2^2:11")
        if name in needs_x:
            sp.add_argument("--x", required=True, help="point literal, or inf")
        sp.add_argument("--steps", type=_positive, default=20 if name == "orbit" else 8)
        sp.add_argument("--budget", type=_positive, default=200)
        sp.add_argument("--prec", type=_positive, default=None)
        sp.add_argument("--level", type=_positive, default=4)
        sp.add_argument("--kmax", type=_positive, default=5)
        sp.add_argument("--samples", type=_positive, default=20)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--mode", choices=("exact", "truncated"), default="exact")
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
    return parser


def _glue_literals(argv: list[str]) -> list[str]:
    # argparse reads "--a -5/4" as two options; rewrite it as "--a=-5/4"
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--a", "--x"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_literals(sys.argv[1:] if argv is None else list(argv)))
    try:
        if args.prec is None:
            args.prec = _default_precision()
        out = COMMANDS[args.command](args)
    except Consistency as exc:
        if args.format == "json" and exc.payload is not None:
            print(json.dumps(exc.payload, separators=(",", ":")))
        print(f"consistency violation: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (RoutingViolation, ConditionFailed) as exc:
        print(f"consistency violation: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except PrecisionError as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (DyadicError, CaseMismatch, ValueError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(out.render(args.format))
    if out.code == EXIT_PRECISION:
        print("precision exhausted", file=sys.stderr)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
