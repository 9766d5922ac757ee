"""Command-line front end: ``hyperkey <command> ...``.

Exit codes: 0 success (or scheme verified), 1 scheme fails a check,
2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import bounds as bd
from . import catalog
from .capacity import DEFAULT_TREE_CAP, DisconnectedSupport, tree_packing_number, upper_envelope
from .model import SourceError, entropy, format_rational, is_pin, load, parse_rational, weight_function, fmt_set
from .partitions import LimitExceeded
from .protocol import SchemeError, load_scheme, scheme_rates
from .submodular import MassAssignment, greedy_chain, laminate

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(ValueError):
    code = "UsageError"


def _dump(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _fail(exc: Exception) -> int:
    code = getattr(exc, "code", type(exc).__name__)
    sys.stderr.write(json.dumps({"error": code, "message": str(exc)}) + "\n")
    return EXIT_INPUT


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _rho_list(text: str) -> list[Fraction]:
    return [_rational(t.strip()) for t in text.split(",") if t.strip()]


def _rho_grid(hg, args) -> list[Fraction]:
    grid = list(args.rho_grid) if args.rho_grid is not None else bd.default_rho_grid(hg)
    return grid + list(args.extra_rho or [])


def source_summary(hg) -> dict:
    return {
        "vertices": hg.m,
        "edges": len(hg.edges),
        "is_pin": is_pin(hg),
        "H_total": format_rational(entropy(hg, hg.full)),
        "support": {fmt_set(b): format_rational(c) for b, c in weight_function(hg).items()},
    }


# ------------------------------------------------------------------ commands

def cmd_validate(args) -> int:
    hg = load(args.source)
    _dump({"valid": True, **source_summary(hg)})
    return EXIT_OK


def cmd_bounds(args) -> int:
    hg = load(args.source)
    limit = args.max_partitions
    ep = bd.ep_bound_tightest(hg, limit)
    vp = bd.vp_bound(hg)
    lam = bd.lamination_bound_search(hg, _rho_grid(hg, args), limit=limit, jobs=args.jobs)
    best = bd.best_of([ep, vp, lam])
    _dump({
        "bounds": [r.to_dict() for r in (ep, vp, lam)],
        "best_slope": "vacuous" if best.slope is None else format_rational(best.slope),
        "best_kind": best.kind if best.slope is not None else None,
    })
    return EXIT_OK


def build_report(hg, rho_grid, limit=None, tree_cap=DEFAULT_TREE_CAP, jobs=1, schemes=()) -> dict:
    """Everything known about a source, as a JSON-ready dict."""
    profile, reports = upper_envelope(hg, rho_grid, limit, jobs)
    bundle = {
        "source": source_summary(hg),
        "bounds": [reports[k].to_dict() for k in (bd.EP, bd.VP, bd.LAMINATION)],
        "capacity": profile.to_dict(),
    }
    if is_pin(hg):
        try:
            bundle["tree_packing"] = tree_packing_number(hg, tree_cap).to_dict()
        except DisconnectedSupport:
            bundle["tree_packing"] = {"value": "0", "trees": []}
    verdicts = [scheme_rates(s) for s in schemes]
    if verdicts:
        bundle["schemes"] = [v.to_dict() for v in verdicts]
        achieved = [
            v.key_rate / v.discussion_rate
            for v in verdicts
            if v.verified and v.discussion_bits and v.key_bits
        ]
        best_achieved = max(achieved) if achieved else None
        upper = profile.best_slope
        bundle["gap"] = {
            "upper_slope": "vacuous" if upper is None else format_rational(upper),
            "achieved_slope": None if best_achieved is None else format_rational(best_achieved),
            "open": best_achieved is None or upper is None or upper > best_achieved,
            "consistent": all(
                v.key_rate <= profile.envelope(v.discussion_rate) for v in verdicts if v.verified
            ),
        }
    return bundle


def cmd_report(args) -> int:
    hg = load(args.source)
    schemes = [load_scheme(p, hg) for p in args.scheme or []]
    _dump(build_report(hg, _rho_grid(hg, args), args.max_partitions, args.tree_cap, args.jobs, schemes))
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.step <= 0 or args.rmax < 0:
        raise UsageError("need step > 0 and rmax >= 0")
    hg = load(args.source)
    profile, _ = upper_envelope(hg, _rho_grid(hg, args), args.max_partitions, args.jobs)
    out = sys.stdout
    out.write("R,envelope\n")
    R = Fraction(0)
    while R <= args.rmax:
        out.write(f"{format_rational(R)},{format_rational(profile.envelope(R))}\n")
        R += args.step
    if args.profile:
        with open(args.profile, "w") as fh:
            json.dump(profile.to_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    hg = load(args.source)
    verdict = scheme_rates(load_scheme(args.scheme, hg))
    _dump(verdict.to_dict())
    return EXIT_OK if verdict.verified else EXIT_FAIL


def cmd_examples(args) -> int:
    if args.list:
        for name in catalog.NAMES:
            print(name)
        return EXIT_OK
    if not args.name:
        raise UsageError("give an example name or --list")
    try:
        hg, scheme = catalog.named(args.name, args.m)
    except KeyError:
        raise UsageError(f"unknown example {args.name!r}; try --list") from None
    os.makedirs(args.out, exist_ok=True)
    src_path = os.path.join(args.out, f"{args.name}.json")
    scheme_path = os.path.join(args.out, f"{args.name}.scheme.json")
    with open(src_path, "w") as fh:
        fh.write(hg.to_json() + "\n")
    with open(scheme_path, "w") as fh:
        json.dump(scheme.to_dict(source=os.path.basename(src_path)), fh, indent=2)
        fh.write("\n")
    _dump({"source": src_path, "scheme": scheme_path})
    return EXIT_OK


def cmd_laminate(args) -> int:
    with open(args.mass) as fh:
        try:
            mu = MassAssignment.from_dict(json.load(fh))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"bad mass file: {exc}") from None
    trace: list = []
    star = laminate(mu, trace)
    greedy = greedy_chain(mu.weights(), mu.ground)
    out = {
        "input": mu.to_dict(),
        "weights": [format_rational(w) for w in mu.weights()],
        "trace": [
            {"sets": [mu.names(b1), mu.names(b2)], "moved": format_rational(d)} for b1, b2, d in trace
        ],
        "laminated": star.to_dict(),
        "greedy": greedy.to_dict(),
    }
    if args.source:
        hg = load(args.source)
        if tuple(mu.ground) != tuple(range(1, hg.m + 1)):
            raise UsageError("with --source the ground set must be the vertices 1..m")
        f = lambda b: entropy(hg, b)  # noqa: E731
        out["objective"] = {
            "input": format_rational(mu.objective(f)),
            "laminated": format_rational(star.objective(f)),
            "greedy": format_rational(greedy.objective(f)),
        }
    _dump(out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _bound_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-partitions", type=int, metavar="M", default=None,
                   help="largest vertex count for exhaustive partition and subset enumeration "
                        "(default 12, or HYPERKEY_MAX_M)")
    p.add_argument("--rho-grid", type=_rho_list, default=None, metavar="LIST",
                   help="comma-separated rho values replacing the default grid, e.g. 0,1/2,20/3")
    p.add_argument("--extra-rho", type=_rho_list, default=None, metavar="LIST",
                   help="rho values added to the grid")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the rho search")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperkey", description="Secret-key rate bounds for hypergraphical sources.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a source file")
    p.add_argument("source")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bounds", help="EP, VP and lamination slopes")
    p.add_argument("source")
    _bound_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("report", help="full JSON report")
    p.add_argument("source")
    _bound_flags(p)
    p.add_argument("--tree-cap", type=int, default=DEFAULT_TREE_CAP,
                   help="maximum number of spanning trees to enumerate")
    p.add_argument("--scheme", action="append", metavar="PATH", help="scheme file to verify and compare")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("curve", help="upper envelope as CSV")
    p.add_argument("source")
    p.add_argument("--rmax", type=_rational, default=Fraction(2))
    p.add_argument("--step", type=_rational, default=Fraction(1, 2))
    p.add_argument("--profile", metavar="PATH", help="also write the capacity profile as JSON")
    _bound_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("verify", help="verify a linear scheme")
    p.add_argument("source")
    p.add_argument("scheme")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("examples", help="write a built-in source and scheme")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--m", type=int, default=None, help="vertex count for complete_pin_m")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("laminate", help="greedy chain and lamination trace for a mass file")
    p.add_argument("mass")
    p.add_argument("--source", help="score objectives with this source's entropy")
    p.set_defaults(func=cmd_laminate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SourceError, SchemeError, LimitExceeded, UsageError, OSError, ValueError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
