"""Command line interface ``cmct``.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys

import numpy as np

from . import acceptance
from .classify import classify, solve_C_for_m
from .config import load_config
from .errors import CMCError, ClosureFailure, DegenerateParams, NotAdmissible
from .period import limit_K_at_infinity, limit_K_at_lower, lower_bound_C, period_K
from .profile import TorusParams, solve_profile
from .surface_io import export_mesh, export_profile, generate_torus, import_csv, verify_mesh

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("cmctori")


def _nonneg_H(text):
    value = float(text)
    if not math.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"H must be a finite non-negative number, got {text!r}")
    return value


def _emit(obj):
    print(json.dumps(obj, indent=2, allow_nan=True))


def cmd_classify(args, cfg):
    report = classify(args.H)
    if args.json:
        _emit(report.as_dict())
    else:
        print(f"H = {report.H:.17g}")
        print(f"Clifford torus radius r = {report.clifford_radius:.17g}")
        if report.rigid:
            print("rigid: the Clifford torus is the only embedded CMC torus")
        for s in report.specs:
            print(f"m = {s.m}: C = {s.C:.17g}, K = {s.K:.17g}")
    return EXIT_OK


def cmd_generate(args, cfg):
    if args.C is None:
        C = solve_C_for_m(args.H, args.m).C
    else:
        C = args.C
    nu = args.nu or cfg.nu_per_period * args.m
    nv = args.nv or cfg.nv
    mesh = generate_torus(args.H, C, args.m, nu, nv, closure_tol=cfg.closure)
    export_mesh(mesh, args.format, args.out)
    _emit({"H": args.H, "m": args.m, "C": C, "nu": nu, "nv": nv, "out": args.out, "format": args.format})
    return EXIT_OK


def cmd_period_table(args, cfg):
    a = lower_bound_C(args.H)
    cmin = args.cmin if args.cmin is not None else a * (1.0 + 1e-6)
    if not cmin > a:
        raise DegenerateParams(f"--cmin must exceed a(H) = {a!r}")
    if not args.cmax > cmin or args.steps < 2:
        raise ValueError("need cmax > cmin and steps >= 2")
    space = np.geomspace if args.spacing == "geometric" else np.linspace
    grid = space(cmin, args.cmax, args.steps)
    rows = [period_K(args.H, c) for c in grid]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["H", "C", "K", "err"])
        for p in rows:
            writer.writerow([repr(p.H), repr(p.C), repr(p.value), repr(p.error_estimate)])
    ks = np.array([p.value for p in rows])
    violations = int(np.sum(np.diff(ks) >= 0))
    lo, hi = limit_K_at_infinity(args.H), limit_K_at_lower(args.H)
    _emit({
        "H": args.H,
        "a": a,
        "limitAtLower": hi,
        "limitAtInfinity": lo,
        "Kmin": float(ks.min()),
        "Kmax": float(ks.max()),
        "outOfBounds": int(np.sum((ks <= lo) | (ks >= hi))),
        "monotonicityViolations": violations,
        "rows": len(rows),
        "out": args.out,
    })
    return EXIT_OK if violations == 0 else EXIT_FAIL


def cmd_verify(args, cfg):
    mesh = import_csv(args.inp)
    needed = mesh.size
    pairs = args.pairs if args.pairs is not None else max(cfg.pair_budget, needed)
    report = verify_mesh(mesh, args.H, pair_budget=pairs, config=cfg)
    _emit(report.as_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_profile(args, cfg):
    params = TorusParams(args.H, args.C)
    sol = solve_profile(params)
    u = np.linspace(0.0, args.periods * sol.T, args.samples)
    export_profile(params, u, args.out)
    _emit({"H": args.H, "C": args.C, "T": sol.T, "t1": sol.t1, "t2": sol.t2, "rows": args.samples, "out": args.out})
    return EXIT_OK


def cmd_selftest(args, cfg):
    results = acceptance.run_all(echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmct", description="Embedded CMC tori in the 3-sphere.")
    p.add_argument("--config", help="JSON file overriding the tolerance table")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", help="list every embedded CMC torus with mean curvature H")
    s.add_argument("--H", type=_nonneg_H, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("generate", help="sample a rotational CMC torus and write it to a file")
    s.add_argument("--H", type=_nonneg_H, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--C", type=float, help="first-integral constant (default: solve K = 2 pi / m)")
    s.add_argument("--nu", type=int)
    s.add_argument("--nv", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["csv", "obj", "obj-stereographic"], default="csv")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("period-table", help="tabulate K(H, C) over a grid of C")
    s.add_argument("--H", type=_nonneg_H, required=True)
    s.add_argument("--cmin", type=float)
    s.add_argument("--cmax", type=float, required=True)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--spacing", choices=["geometric", "linear"], default="geometric")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_period_table)

    s = sub.add_parser("verify", help="verify a mesh CSV against mean curvature H")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--H", type=_nonneg_H, required=True)
    s.add_argument("--pairs", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("profile", help="dump the profile functions of (H, C) as CSV")
    s.add_argument("--H", type=_nonneg_H, required=True)
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--samples", type=int, default=257)
    s.add_argument("--periods", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ClosureFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (NotAdmissible, DegenerateParams, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CMCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
