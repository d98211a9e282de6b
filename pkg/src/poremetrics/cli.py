"""Command-line surface: set generation, pore reports, ratio and porosity
checks, Muckenhoupt product sweeps, probability statistics, and the point-dump
figure data.

Exit codes: 0 success, 1 usage error, 2 precondition violation, 3 a depth
limit prevented certification.  Output files are byte-stable for a fixed
command line; run metadata goes to a separate ``.meta.json`` sidecar.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Cube
from .errors import InsufficientDepthError, PreconditionError
from .pores import FractionQuery, Side, enumerate_pores, ratio_condition, weak_porosity_check
from .porestats import (
    EXPECTATION_PRODUCT_BOUND,
    binomial_check,
    divergence_scan,
    kakeya_product,
    length_law,
    moment_closed_form,
)
from .rationals import format_rational, parse_rational
from .setmodels import (
    ContractionSequence,
    FinitePoints,
    Generated,
    IntegerLattice,
    envelope_cube,
    envelope_length,
    generate,
    load_set_spec,
    save_set_spec,
)
from .weights import ApQuery, ap_product

SCHEMA = "pore-metrics/1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


@dataclass
class RunConfig:
    oracle: object = None
    cubes: list = None
    s: Fraction = None
    t: Fraction = None
    alpha: Fraction = None
    p: Fraction = None
    max_gen: int = 40
    out: str | None = None
    fmt: str = "csv"
    jobs: int = 1


def _parse_sequence(rule: str, c: str | None) -> ContractionSequence:
    if rule == "half_harmonic":
        return ContractionSequence.half_harmonic()
    if rule == "constant":
        if c is None:
            raise PreconditionError("constant rule needs --c")
        return ContractionSequence.constant(parse_rational(c))
    raise PreconditionError(f"unknown rule {rule!r}")


def parse_set(spec: str):
    """Set selector: lattice | point:R | points:R1,R2,... |
    generated:RULE[:C]:LEVEL[:reflect] | a path to a set-spec JSON file."""
    if spec.endswith(".json") or spec.startswith("file:"):
        return load_set_spec(spec.removeprefix("file:"))
    if spec == "lattice":
        return IntegerLattice()
    if spec.startswith("point:"):
        return FinitePoints((parse_rational(spec[len("point:"):]),))
    if spec.startswith("points:"):
        parts = spec[len("points:"):].split(",")
        return FinitePoints(tuple(sorted(parse_rational(p) for p in parts)))
    if spec.startswith("generated:"):
        parts = spec.split(":")[1:]
        reflect = parts[-1] == "reflect"
        if reflect:
            parts = parts[:-1]
        if parts[0] == "half_harmonic":
            seq = ContractionSequence.half_harmonic()
            level = int(parts[1])
        else:
            seq = ContractionSequence.constant(parse_rational(parts[1]))
            level = int(parts[2])
        return Generated(seq, level, reflect)
    raise PreconditionError(f"cannot parse set spec {spec!r}")


_INTERVAL_RE = re.compile(r"^\[([^,]+),([^)]+)\)$")


def parse_cubes(spec: str, oracle=None) -> list[Cube]:
    """Cube family: unit:[a,b) | interval:[a,b) | dyadic:A..B | envelopes:A..B."""
    if spec.startswith(("unit:", "interval:")):
        body = spec.split(":", 1)[1]
        m = _INTERVAL_RE.match(body)
        if not m:
            raise PreconditionError(f"cannot parse interval {body!r}")
        return [Cube.interval(parse_rational(m.group(1)), parse_rational(m.group(2)))]
    if spec.startswith("dyadic:"):
        a, b = _parse_range(spec[len("dyadic:"):])
        return [Cube.interval(0, Fraction(2) ** k) for k in range(a, b + 1)]
    if spec.startswith("envelopes:"):
        if not isinstance(oracle, Generated):
            raise PreconditionError("envelope cubes need a generated set")
        a, b = _parse_range(spec[len("envelopes:"):])
        return [envelope_cube(oracle.seq, m) for m in range(a, b + 1)]
    raise PreconditionError(f"cannot parse cube spec {spec!r}")


def _parse_range(text: str) -> tuple[int, int]:
    a, _, b = text.partition("..")
    lo, hi = int(a), int(b if b else a)
    if hi < lo:
        raise PreconditionError("empty range")
    return lo, hi


def _emit(text: str, out: str | None, argv: list[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    with open(out + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump({"schema": SCHEMA, "argv": argv}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt_bound(v) -> str:
    if isinstance(v, Fraction):
        return format_rational(v)
    if v == math.inf:
        return "inf"
    return repr(float(v))


def _ordered_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_gen_set(args, argv) -> int:
    seq = _parse_sequence(args.rule, args.c)
    points, envelope = generate(seq, args.level, args.reflect)
    if args.spec_out:
        save_set_spec(Generated(seq, args.level, args.reflect), args.spec_out)
    lines = [format_rational(p) for p in points]
    text = "\n".join(lines) + "\n"
    _emit(text, args.points_out, argv)
    if args.points_out:
        sys.stdout.write(
            f"{len(points)} points, envelope [{format_rational(envelope[0])}, "
            f"{format_rational(envelope[1])}]\n"
        )
    return 0


def cmd_fig1(args, argv) -> int:
    bound = parse_rational(args.bound)
    groups = [
        ("c=1", ContractionSequence.constant(1)),
        ("half_harmonic", ContractionSequence.half_harmonic()),
        ("c=1/2", ContractionSequence.constant(Fraction(1, 2))),
    ]
    rows = []
    for label, seq in groups:
        level = 0
        while envelope_length(seq, level) < bound:
            level += 1
        points, _ = generate(seq, level, with_reflection=True)
        for p in points:
            if -bound <= p <= bound:
                rows.append([label, format_rational(p), repr(float(p))])
    _emit(_csv_text(["sequence", "point", "value"], rows), args.out, argv)
    return 0


def cmd_pores(args, argv) -> int:
    oracle = parse_set(args.set)
    (cube,) = parse_cubes(args.cube, oracle)
    family = enumerate_pores(oracle, cube, args.max_gen)
    if args.format == "json":
        payload = {
            "schema": SCHEMA,
            "window": str(cube),
            "max_generation": family.max_generation,
            "tail_mass": format_rational(family.tail_mass),
            "tail_is_pore_mass": family.tail_is_pore_mass,
            "entries": [
                {
                    "generation": g,
                    "length": format_rational(length),
                    "count": count,
                    "mass": format_rational(mass),
                }
                for g, length, count, mass in family.entries()
            ],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out, argv)
    else:
        rows = [
            ["pore", g, format_rational(length), count, format_rational(mass), "exact"]
            for g, length, count, mass in family.entries()
        ]
        rows.append(
            ["tail", "", "", "", format_rational(family.tail_mass),
             "pore-mass" if family.tail_is_pore_mass else "mixed"]
        )
        _emit(
            _csv_text(["kind", "generation", "length", "count", "mass", "certainty"], rows),
            args.out,
            argv,
        )
    return 0


def cmd_ls_ratio(args, argv) -> int:
    oracle = parse_set(args.set)
    cubes = parse_cubes(args.cubes, oracle)
    report = ratio_condition(oracle, cubes, parse_rational(args.s), args.max_gen)
    if args.format == "json":
        payload = {
            "schema": SCHEMA,
            "s": format_rational(report.s),
            "max_ratio": format_rational(report.max_ratio) if report.max_ratio is not None else None,
            "rows": [
                {
                    "cube_id": r.cube_id,
                    "L_s": format_rational(r.largest.value) if r.largest and r.largest.exact else None,
                    "S_s": format_rational(r.smallest.value) if r.smallest and r.smallest.exact else None,
                    "ratio": format_rational(r.ratio) if r.ratio is not None else None,
                    "depth_ok": r.depth_ok,
                    "note": r.note,
                }
                for r in report.rows
            ],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out, argv)
    else:
        _emit(report.to_csv(), args.out, argv)
    return 0


def cmd_ap_scan(args, argv) -> int:
    oracle = parse_set(args.set)
    cubes = parse_cubes(args.cubes, oracle)
    query = ApQuery(parse_rational(args.alpha), parse_rational(args.p))
    # The environment variable overrides the flag.
    jobs = int(os.environ.get("PORE_METRICS_JOBS", args.jobs or 1))

    def one(item):
        i, cube = item
        res = ap_product(oracle, cube, query, args.max_gen)
        return [
            f"{i}:{cube}",
            format_rational(query.alpha),
            format_rational(query.p),
            _fmt_bound(res.product.lo),
            _fmt_bound(res.product.hi),
            res.case,
        ]

    rows = _ordered_map(one, list(enumerate(cubes)), jobs)
    _emit(
        _csv_text(["cube_id", "alpha", "p", "product_lo", "product_hi", "case_tag"], rows),
        args.out,
        argv,
    )
    return 0


def cmd_porosity(args, argv) -> int:
    oracle = parse_set(args.set)
    (cube,) = parse_cubes(args.cube, oracle)
    result = weak_porosity_check(
        oracle, cube, parse_rational(args.sigma), parse_rational(args.gamma), args.max_gen
    )
    payload = {
        "schema": SCHEMA,
        "window": str(cube),
        "sigma": args.sigma,
        "gamma": args.gamma,
        "holds": result.holds,
        "achieved_mass": format_rational(result.achieved_mass),
        "threshold_length": format_rational(result.threshold_length)
        if result.threshold_length is not None
        else None,
        "maximal_length": format_rational(result.maximal_length)
        if result.maximal_length is not None
        else None,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out, argv)
    return 0


def cmd_prob_stats(args, argv) -> int:
    seq = _parse_sequence(args.rule, args.c)
    lo, hi = _parse_range(args.levels)
    bound = repr(EXPECTATION_PRODUCT_BOUND)
    rows = []
    for level in range(lo, hi + 1):
        ex = moment_closed_form(seq, level, 1)
        ex_inv = moment_closed_form(seq, level, -1)
        product = kakeya_product(seq, level)
        if seq.rule == "constant" and seq.c == Fraction(1, 2):
            ok, _ = binomial_check(length_law(seq, level))
            binom = "true" if ok else "false"
        else:
            binom = "na"
        rows.append(
            [
                level,
                format_rational(Fraction(ex)),
                format_rational(Fraction(ex_inv)),
                format_rational(product),
                bound,
                binom,
            ]
        )
    _emit(
        _csv_text(["level", "EX", "EXinv", "product", "bound_e_pi2_75", "binom_ok"], rows),
        args.out,
        argv,
    )
    if args.divergence_t:
        t = parse_rational(args.divergence_t)
        scan_rows = [
            [r.level, r.k_min, r.k_max, format_rational(r.tilde_ratio)]
            for r in divergence_scan(t, range(lo, hi + 1))
        ]
        _emit(
            _csv_text(["level", "k_min", "k_max", "tilde_ratio"], scan_rows),
            args.divergence_out,
            argv,
        )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="pore-metrics", description=__doc__)
    parser.add_argument("--jobs", type=int, default=0, help="worker threads for cube sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-set", help="materialize a generated point set")
    p.add_argument("--rule", required=True, choices=["constant", "half_harmonic"])
    p.add_argument("--c", help="contraction value for the constant rule, e.g. 1/2")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--reflect", action="store_true")
    p.add_argument("--spec-out", help="write a set-spec JSON file")
    p.add_argument("--points-out", help="write the point dump here instead of stdout")
    p.set_defaults(fn=cmd_gen_set)

    p = sub.add_parser("fig1", help="point dump of the three reference sequences")
    p.add_argument("--bound", default="8")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_fig1)

    p = sub.add_parser("pores", help="generation histogram of a window's pores")
    p.add_argument("--set", required=True)
    p.add_argument("--cube", required=True)
    p.add_argument("--max-gen", type=int, default=40)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_pores)

    p = sub.add_parser("ls-ratio", help="largest/smallest fraction lengths and their ratio")
    p.add_argument("--set", required=True)
    p.add_argument("--cubes", required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--max-gen", type=int, default=40)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_ls_ratio)

    p = sub.add_parser("ap-scan", help="Muckenhoupt product bracket over a cube family")
    p.add_argument("--set", required=True)
    p.add_argument("--cubes", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--max-gen", type=int, default=40)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_ap_scan)

    p = sub.add_parser("porosity-check", help="mass of long pores against sigma |Q0|")
    p.add_argument("--set", required=True)
    p.add_argument("--cube", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--max-gen", type=int, default=40)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_porosity)

    p = sub.add_parser("prob-stats", help="moment table of the gap-length law")
    p.add_argument("--rule", required=True, choices=["constant", "half_harmonic"])
    p.add_argument("--c")
    p.add_argument("--levels", required=True, help="range A..B")
    p.add_argument("--out")
    p.add_argument("--divergence-t", help="also run the quantile divergence scan at this t")
    p.add_argument("--divergence-out")
    p.set_defaults(fn=cmd_prob_stats)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.fn(args, argv)
    except PreconditionError as err:
        sys.stderr.write(f"precondition violated: {err}\n")
        return 2
    except InsufficientDepthError as err:
        sys.stderr.write(f"insufficient depth: {err}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
