"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for an
invalid config, 3 when a numerical routine aborts.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import __version__
from .config import DEFAULTS, SUITES, config_hash, load, resolve
from .errors import ConfigError, EndsError
from .geometry import FAMILIES, POTENTIALS
from .quantum.packets import PACKET_FAMILIES
from .quantum.waveop import BORDERLINE_CASES
from .report import ReportBundle, provenance
from .suites import RUNNERS

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

logger = logging.getLogger("endscat")


def list_builtins():
    """Catalog of metric families, potential kinds, packet families and borderline cases."""
    return {
        "metrics": {k: v["doc"] for k, v in FAMILIES.items()},
        "potentials": {k: v["doc"] for k, v in POTENTIALS.items()},
        "packets": dict(PACKET_FAMILIES),
        "borderline_cases": dict(BORDERLINE_CASES),
        "suites": list(SUITES),
    }


def run(cfg, strict=False, out_dir=None):
    """Execute the suites selected by a resolved config and return the bundle.

    Numerical aborts are caught and recorded in ``bundle.error``.
    """
    t0 = time.perf_counter()
    bundle = ReportBundle()
    suites = list(RUNNERS) if cfg["suite"] == "all" else [cfg["suite"]]
    try:
        for name in suites:
            logger.info("running suite %s", name)
            bundle.add(name, *RUNNERS[name](cfg, strict))
    except (EndsError, ArithmeticError) as exc:
        bundle.error = f"{type(exc).__name__}: {exc}"
        logger.error("numerical abort: %s", bundle.error)
    bundle.provenance = provenance(config_hash(cfg), time.perf_counter() - t0)
    if out_dir is not None:
        bundle.write(out_dir)
    return bundle


def exit_code(bundle):
    if bundle.error is not None:
        return EXIT_NUMERIC
    return EXIT_OK if bundle.passed else EXIT_FAIL


def _parse_floats(text):
    return [float(x) for x in text.split(",") if x.strip()] if text else []


def _overrides(args):
    """Config fragment from the per-subcommand convenience flags."""
    raw = {}
    if getattr(args, "family", None):
        raw["metric"] = {"family": args.family, "params": _parse_floats(args.params)}
        if args.d is not None:
            raw["metric"]["d"] = args.d
    if getattr(args, "potential", None):
        raw["potential"] = {"kind": args.potential, "params": _parse_floats(args.potential_params)}
    if getattr(args, "ell", None) is not None:
        raw["ell"] = args.ell
    if getattr(args, "case", None):
        raw.setdefault("borderline", {})["case"] = args.case
    if getattr(args, "c", None) is not None:
        raw.setdefault("borderline", {})["c"] = args.c
    if getattr(args, "modified", False):
        raw["cook"] = {"modified": True}
    return raw


def _deep_update(base, extra):
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v
    return base


def build_parser():
    p = argparse.ArgumentParser(prog="endscat", description="Scattering diagnostics for manifolds with warped ends.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML experiment config")
    common.add_argument("--out", help="output directory (default: config 'output')")
    common.add_argument("--strict", action="store_true", help="treat borderline Cook verdicts as failures")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--family", help="metric family")
    model.add_argument("--params", default="", help="comma-separated metric parameters")
    model.add_argument("--d", type=int, help="dimension")
    model.add_argument("--potential", help="potential kind")
    model.add_argument("--potential-params", default="", help="comma-separated potential parameters")
    model.add_argument("--ell", type=int, help="angular degree")

    sub.add_parser("conditions", parents=[common, model], help="best (delta, kappa, eta) on a probe grid")
    sub.add_parser("classical", parents=[common, model], help="geodesic sweep with decay fits")
    c = sub.add_parser("cook", parents=[common, model], help="Cook integrand profile and verdict")
    c.add_argument("--modified", action="store_true", help="use the Dollard-modified integrand")
    sub.add_parser("wave", parents=[common, model], help="finite-time wave operators")
    b = sub.add_parser("borderline", parents=[common], help="borderline counterexample demo")
    b.add_argument("--case", choices=sorted(BORDERLINE_CASES))
    b.add_argument("--c", type=float, help="Coulomb strength for eta0")
    r = sub.add_parser("run", parents=[common], help="run the suites selected by --config")
    r.set_defaults(config_required=True)
    sub.add_parser("list-builtins", help="print the builtin catalog as JSON")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-builtins":
        print(json.dumps(list_builtins(), indent=2, ensure_ascii=False))
        return EXIT_OK

    try:
        if args.config:
            cfg, _ = load(args.config)
        elif getattr(args, "config_required", False):
            raise ConfigError("run needs --config")
        else:
            cfg = resolve({"schema_version": DEFAULTS["schema_version"], "suite": args.command})
        if args.command != "run":
            cfg["suite"] = args.command
            cfg = resolve(_deep_update(cfg, _overrides(args)))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or cfg["output"]
    bundle = run(cfg, strict=args.strict, out_dir=out_dir)
    for name, ok in sorted(bundle.checks.items()):
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    if bundle.error:
        print(f"ABORT {bundle.error}", file=sys.stderr)
    print(f"wrote {out_dir}")
    return exit_code(bundle)


if __name__ == "__main__":
    sys.exit(main())
