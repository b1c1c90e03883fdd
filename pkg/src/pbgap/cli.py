"""Command-line front end: construct, profile, pb4, embed, verify-all.

Exit codes: 0 success, 2 validation error, 3 failed invariant or falsification event.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import embed
from .construction import (
    build_theorem_pair,
    corollary_q,
    corollary_rescale,
    derive_params,
    verify_pair,
)
from .errors import OverlapInstance, PbgapError
from .pb4 import Pb4Instance, claim_instance, margin_schedule, upper_bound_minimize
from .profile import ProfilePoint, profile_table
from .symplectic import Resolution

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3
THREADS_ENV = "PBGAP_THREADS"

log = logging.getLogger("pbgap")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "+inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(obj) -> str:
    # repr of a float is the shortest string that round-trips exactly
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def read_config(path: str) -> dict[str, str]:
    """key = value lines; '#' starts a comment; keys use flag spelling (dashes or underscores)."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def write_config(args: argparse.Namespace, path: str):
    skip = {"command", "config", "manifest", "func", "verbose"}
    lines = [f"{k} = {v}" for k, v in sorted(vars(args).items())
             if k not in skip and v is not None and not isinstance(v, bool)]
    lines += [f"{k} = {'true' if v else 'false'}" for k, v in sorted(vars(args).items())
              if k not in skip and isinstance(v, bool)]
    Path(path).write_text("\n".join(lines) + "\n")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _resolution(args) -> Resolution:
    return Resolution(plane=args.resolution, radial=args.radial_resolution)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()] if text else []


# ---------------------------------------------------------------------------
# subcommands


def cmd_construct(args) -> int:
    res = _resolution(args)
    if args.C is not None:
        q = corollary_q(args.C)
        p = q / 2 if args.p is None else args.p
        params = derive_params(p, q, args.n, args.eps_prime)
    else:
        if args.p is None or args.q is None:
            raise ValueError("construct needs --p and --q (or --C)")
        params = derive_params(args.p, args.q, args.n, args.eps_prime)
    pair = build_theorem_pair(params)
    checks, numbers = verify_pair(pair, res, seed=args.seed, samples=args.samples, tol=args.tol)
    report = {
        "params": params.to_dict(),
        "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks],
        "numbers": numbers,
        "descriptor": pair.to_dict(),
    }
    ok = all(c.ok for c in checks)
    if args.C is not None:
        _, _, cor = corollary_rescale(pair, args.C, res)
        report["corollary"] = cor.to_dict()
        good = abs(cor.bracket.grid_max - 1.0) <= args.tol
        report["checks"].append({"name": "rescaled bracket = 1", "ok": good,
                                 "detail": f"{cor.bracket.grid_max!r}"})
        ok &= good
    _emit(dumps(report), args.out)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_profile(args) -> int:
    params = derive_params(args.p, args.q, args.n, args.eps_prime)
    pair = build_theorem_pair(params)
    s_grid = _floats(args.s)
    rows = profile_table(pair, s_grid, adversary_budget=args.budget, seed=args.seed,
                         restarts=args.restarts, res=_resolution(args), threads=_threads(args))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ProfilePoint.CSV_FIELDS)
    for r in rows:
        w.writerow(["%.17g" % v for v in r.row()])
    _emit(buf.getvalue(), args.out)
    if any(r.falsified for r in rows):
        log.error("falsification event in profile run")
        return EXIT_FAILED
    return EXIT_OK


def cmd_pb4(args) -> int:
    if args.instance:
        inst = Pb4Instance.from_dict(json.loads(Path(args.instance).read_text()))
        family, start = None, None
    else:
        inst, family, start = claim_instance(derive_params(args.p, args.q, args.n, args.eps_prime),
                                             count=args.points)
    try:
        inst.validate()
    except OverlapInstance:
        _emit(dumps({"bestValue": "+inf", "iterations": 0, "witnessDescriptor": None,
                     "convention": "X0 meets X1 or Y0 meets Y1"}), args.out)
        return EXIT_OK
    result = upper_bound_minimize(inst, family, budget=args.budget, seed=args.seed, start=start)
    out = result.to_dict()
    out["reference"] = inst.reference
    out["reviewFlag"] = result.best_value < 0.5 * inst.reference
    if args.margins:
        l2 = (inst.area if family is None else family.b ** 2)
        sched = margin_schedule(inst, [m * l2 for m in _floats(args.margins)], family=family)
        out["marginSchedule"] = {"margins": [r.margin for r in sched.runs],
                                 "values": sched.values, "extrapolated": sched.extrapolated,
                                 "nonIncreasing": sched.non_increasing, "reviewFlag": sched.review}
        out["reviewFlag"] = out["reviewFlag"] or sched.review
    _emit(dumps(out), args.out)
    return EXIT_FAILED if out["reviewFlag"] else EXIT_OK


def cmd_embed(args) -> int:
    k = args.k if args.k is not None else embed.pick_k(args.target_area)
    curve = embed.MonomialCurve(k, args.n)
    numeric = embed.symplectic_area(curve, tol=args.tol)
    worst = embed.check_containment(curve, args.samples, args.seed)
    report = {"k": k, "analyticArea": curve.analytic_area, "numericArea": numeric,
              "maxSquaredNorm": worst, "contained": worst <= 2.0 * (1 + 1e-12),
              "injective": embed.check_injective(curve, seed=args.seed)}
    if args.target_area is not None:
        report["targetArea"] = args.target_area
    _emit(dumps(report), args.out)
    ok = (abs(numeric - curve.analytic_area) <= max(args.tol, 1e-6) and report["contained"]
          and report["injective"])
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify_all(args) -> int:
    res = _resolution(args)
    summary = []
    ok = True
    for p, q, n in ((1.0, 4.0, 2), (1.0, 4.0, 3), (0.5, 2.0, 2)):
        checks, _ = verify_pair(build_theorem_pair(derive_params(p, q, n)), res, seed=args.seed)
        good = all(c.ok for c in checks)
        ok &= good
        summary.append({"case": f"p={p} q={q} n={n}", "ok": good,
                        "failed": [c.name for c in checks if not c.ok]})
    pair = build_theorem_pair(derive_params(corollary_q(1.0) / 2, corollary_q(1.0), 2))
    _, _, cor = corollary_rescale(pair, 1.0, res)
    good = abs(cor.bracket.certified_upper_bound - 1.0) <= 0.01 and cor.rho_zero_rescaled == 4.0
    ok &= good
    summary.append({"case": "corollary C=1", "ok": good, "bracket": cor.bracket.to_dict()})
    curve = embed.MonomialCurve(embed.pick_k(10 * math.pi))
    good = curve.k == 9 and abs(embed.symplectic_area(curve) - curve.analytic_area) <= 1e-6
    ok &= good
    summary.append({"case": "monomial curve", "ok": good, "k": curve.k})
    inst, family, start = claim_instance(derive_params(1.0, 4.0, 2))
    seeded = upper_bound_minimize(inst, family, budget=0, start=start)
    good = abs(seeded.best_value - 4.0) <= 0.04
    ok &= good
    summary.append({"case": "pb4 seeded", "ok": good, "bestValue": seeded.best_value})
    _emit(dumps({"ok": ok, "cases": summary}), args.out)
    return EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser


def _common(sp, pq: bool = True):
    if pq:
        sp.add_argument("--p", type=float, default=None)
        sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--eps-prime", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--resolution", type=int, default=4096)
    sp.add_argument("--radial-resolution", type=int, default=512)
    sp.add_argument("--out", default=None, help="output file (stdout if omitted)")
    sp.add_argument("--config", default=None, help="key = value defaults file")
    sp.add_argument("--manifest", default=None, help="write the effective config here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbgap", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("construct", help="build and verify a theorem pair")
    _common(sp)
    sp.add_argument("--C", type=float, default=None, help="corollary mode: q = 1/(64 C^2)")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--tol", type=float, default=0.01)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("profile", help="profile bounds table (CSV)")
    _common(sp)
    sp.add_argument("--s", default="", help="comma-separated levels s in [0, q]")
    sp.add_argument("--budget", type=int, default=200)
    sp.add_argument("--restarts", type=int, default=1)
    sp.add_argument("--threads", type=int, default=None)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("pb4", help="certified pb4 upper bound (JSON)")
    _common(sp)
    sp.add_argument("--instance", default=None, help="JSON instance {sides, area, box}")
    sp.add_argument("--budget", type=int, default=40)
    sp.add_argument("--points", type=int, default=256)
    sp.add_argument("--margins", default="", help="comma-separated margins in units of l^2")
    sp.set_defaults(func=cmd_pb4)

    sp = sub.add_parser("embed", help="monomial curve area check")
    _common(sp, pq=False)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--target-area", type=float, default=None)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("verify-all", help="run the invariant suite on the reference cases")
    _common(sp, pq=False)
    sp.set_defaults(func=cmd_verify_all)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv):
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        if key not in actions:
            raise ValueError(f"unknown config key {key!r} for {args.command}")
        act = actions[key]
        if act.type is not None:
            defaults[key] = act.type(value)
        elif value.lower() in ("true", "false"):
            defaults[key] = value.lower() == "true"
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except (ValueError, OSError) as exc:
        print(f"pbgap: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        # argparse usage errors exit with 2; --help exits with 0
        if exc.code in (0, None):
            raise
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.manifest:
        write_config(args, args.manifest)
    try:
        return args.func(args)
    except (PbgapError, ValueError) as exc:
        print(f"pbgap: error: {exc}", file=sys.stderr)
        return EXIT_FAILED if isinstance(exc, PbgapError) and not isinstance(exc, ValueError) \
            else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
