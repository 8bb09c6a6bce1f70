"""Command-line front door.

Exit codes: 0 success, 1 verification FAIL verdicts, 2 usage or scene
errors, 3 degeneracy budget exceeded, 4 subset budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .config import DEFAULT, Config
from .errors import (BudgetExceeded, DegeneracyBudgetExceeded, KinelabError,
                     SchemaError, UnsupportedScene)
from .invariants import invariant_profile
from .kinematics import (LAWS, VerificationReport, normalize_law_id, verify,
                         verify_all)
from .scene_io import emit_profile, emit_report, parse_scene

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DEGENERACY = 3
EXIT_BUDGET = 4


def _default_workers() -> int:
    env = os.environ.get("KINELAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--scene", required=True, help="scene JSON path")
    p.add_argument("--samples", type=int, default=20000,
                   help="Monte Carlo samples per estimator (default 20000)")
    p.add_argument("--seed", type=int, default=42, help="base RNG seed")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: available parallelism, "
                        "or KINELAB_WORKERS)")
    p.add_argument("--format", choices=("json", "csv", "markdown"),
                   default="json")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a tolerance/config field")
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved configuration and exit")


def _resolve_config(args) -> Config:
    cfg = DEFAULT
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise SchemaError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if not hasattr(cfg, key):
            raise SchemaError(f"unknown config field {key!r}")
        current = getattr(cfg, key)
        overrides[key] = type(current)(json.loads(value))
    return cfg.replace(**overrides) if overrides else cfg


def _write_out(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_scene(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_scene(fh.read())


def cmd_invariants(args) -> int:
    config = _resolve_config(args)
    if args.dump_config:
        print(json.dumps(config.as_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    if args.samples < 100:
        print("error: --samples must be at least 100", file=sys.stderr)
        return EXIT_USAGE
    scene = _load_scene(args.scene)
    if args.germ not in scene.germs:
        print(f"error: germ {args.germ!r} not in scene "
              f"(have: {', '.join(scene.germs) or 'none'})", file=sys.stderr)
        return EXIT_USAGE
    workers = args.workers or _default_workers()
    t0 = time.time()
    profile = invariant_profile(scene.germs[args.germ], args.samples,
                                args.seed, workers, config)
    print(f"profile of {args.germ!r} in {time.time() - t0:.1f}s",
          file=sys.stderr)
    _write_out(emit_profile(profile, scene.fingerprint, args.seed,
                            args.format), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _resolve_config(args)
    if args.dump_config:
        print(json.dumps(config.as_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    if args.samples < 100:
        print("error: --samples must be at least 100", file=sys.stderr)
        return EXIT_USAGE
    if not args.all and not args.law:
        print("error: pass --law ID or --all", file=sys.stderr)
        return EXIT_USAGE
    scene = _load_scene(args.scene)
    if args.germs:
        names = [s.strip() for s in args.germs.split(",") if s.strip()]
        missing = [s for s in names if s not in scene.germs]
        if missing:
            print(f"error: germs not in scene: {', '.join(missing)}",
                  file=sys.stderr)
            return EXIT_USAGE
        from .scene_io import Scene
        scene = Scene(scene.ambient_dim,
                      {s: scene.germs[s] for s in names},
                      scene.polytope_unions, scene.metadata,
                      scene.fingerprint)
    workers = args.workers or _default_workers()
    t0 = time.time()
    if args.all:
        report = verify_all(scene, args.samples, args.seed, workers, config)
    else:
        law = normalize_law_id(args.law)
        report = VerificationReport(scene.fingerprint, args.seed,
                                    args.samples)
        report.entries.extend(
            verify(law, scene, args.samples, args.seed, workers, config))
        report.wall_time = time.time() - t0
    print(f"{len(report.entries)} law entries in {time.time() - t0:.1f}s",
          file=sys.stderr)
    _write_out(emit_report(report, args.format), args.out)
    return EXIT_FAIL if report.failed else EXIT_OK


def cmd_oracle(args) -> int:
    config = _resolve_config(args)
    if args.dump_config:
        print(json.dumps(config.as_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    from .oracles import euler_oracle_suite, feasibility_oracle_suite
    run_euler = args.euler or not args.feasibility
    run_feas = args.feasibility or not args.euler
    ok = True
    if run_euler:
        res = euler_oracle_suite(args.queries, args.max_cells, args.seed,
                                 config)
        print(f"euler oracle: {res['agree']}/{res['total']} agree, "
              f"{res['degenerate']} degenerate draws resampled")
        ok = ok and res["agree"] == res["total"]
        if res.get("budget_exceeded"):
            return EXIT_BUDGET
    if run_feas:
        res = feasibility_oracle_suite(args.lp_instances, args.seed, config)
        frac = res["agree"] / max(res["decided"], 1)
        print(f"feasibility oracle: {res['agree']}/{res['decided']} "
              f"numeric-vs-rational agree ({frac:.2%}), "
              f"{res['degenerate']} flagged DEGENERATE")
        ok = ok and res["agree"] == res["decided"]
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kinelab",
        description="Local integral-geometric invariants of conic germs and "
                    "Monte Carlo verification of kinematic formulas")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_inv = sub.add_parser("invariants",
                           help="compute the invariant profile of one germ")
    _add_common(p_inv)
    p_inv.add_argument("--germ", required=True, help="germ name in the scene")
    p_inv.set_defaults(fn=cmd_invariants)

    p_ver = sub.add_parser("verify", help="verify kinematic laws on a scene")
    _add_common(p_ver)
    p_ver.add_argument("--law", help="law id, e.g. thm8.15 "
                                     f"(valid: {', '.join(LAWS)})")
    p_ver.add_argument("--all", action="store_true",
                       help="run every law the scene supports")
    p_ver.add_argument("--germs", help="comma-separated germ names to use")
    p_ver.set_defaults(fn=cmd_verify)

    p_or = sub.add_parser("oracle",
                          help="run independent-oracle agreement suites")
    p_or.add_argument("--euler", action="store_true",
                      help="pruned vs full-lattice Euler enumeration")
    p_or.add_argument("--feasibility", action="store_true",
                      help="numeric vs exact-rational LP verdicts")
    p_or.add_argument("--queries", type=int, default=2000,
                      help="number of random Euler queries")
    p_or.add_argument("--max-cells", type=int, default=8,
                      help="max cells per random query (<= 12)")
    p_or.add_argument("--lp-instances", type=int, default=500)
    p_or.add_argument("--seed", type=int, default=42)
    p_or.add_argument("--set", action="append", default=[],
                      metavar="KEY=VALUE")
    p_or.add_argument("--dump-config", action="store_true")
    p_or.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (SchemaError, UnsupportedScene, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegeneracyBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except KinelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
