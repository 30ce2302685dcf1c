"""Command-line entry point: ``gknoise {run,compare,estimate-noise,export-problem}``.

Exit status is 0 on success, 2 for invalid settings or inputs and 1 when the
computation fails numerically.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .experiment import (ConfigError, NumericalError, build_config, compare, estimate_noise,
                         export_problem, format_report, load_config, run, summary)

# flag dest -> config key
_FLAG_KEYS = {
    "problem": "problem.name",
    "n": "problem.n",
    "depth": "problem.depth",
    "nx": "problem.nx",
    "angles": "problem.angles",
    "nrays": "problem.nrays",
    "matrix": "problem.matrix",
    "sidecar": "problem.sidecar",
    "rhs": "problem.rhs",
    "noise": "noise.kind",
    "level": "noise.level",
    "exponent": "noise.exponent",
    "scale": "noise.scale",
    "n0": "noise.n0",
    "reorth": "reorth",
    "kmax": "kmax",
    "methods": "methods",
    "out": "outputs",
    "seed": "seed",
    "plateau": "plateau",
    "rank_tol": "rank_tol",
}


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value experiment file")
    g = p.add_argument_group("problem")
    g.add_argument("--problem", help="shaw, phillips, gravity, foxgood, paralleltomo or file")
    g.add_argument("--n", help="size of the 1-D problems")
    g.add_argument("--depth", help="gravity source depth")
    g.add_argument("--nx", help="paralleltomo image side")
    g.add_argument("--angles", help="start:stop:step or comma list, degrees")
    g.add_argument("--nrays", help="rays per angle")
    g.add_argument("--matrix", help="Matrix Market operator (file problems)")
    g.add_argument("--sidecar", help="exported problem.txt with b (file problems)")
    g.add_argument("--rhs", help="single-column CSV right-hand side (file problems)")
    g = p.add_argument_group("noise")
    g.add_argument("--noise", help="white, red, violet, poisson or tomo-photon")
    g.add_argument("--level", help="relative noise level")
    g.add_argument("--exponent", help="spectral exponent for colored noise")
    g.add_argument("--scale", help="Poisson scale")
    g.add_argument("--n0", help="mean photon count")
    g = p.add_argument_group("iteration")
    g.add_argument("--reorth", help="full-double or none")
    g.add_argument("--kmax", help="last iteration")
    g.add_argument("--methods", help="comma list of craig, lsqr, lsmr")
    g.add_argument("--seed", help="noise seed")
    g.add_argument("--plateau", help="phase threshold relative to max |phi|")
    g.add_argument("--rank-tol", dest="rank_tol", help="threshold for rank(S_k)")
    p.add_argument("--out", help="output directory")


def _config_from_args(args):
    entries = load_config(args.config) if args.config else {}
    overrides = {}
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            flag = "--" + dest.replace("_", "-")
            overrides[key] = (str(value), flag)
    return build_config(entries, overrides)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    result, paths = run(cfg)
    print(format_report(summary(result)), end="")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def _cmd_compare(args) -> int:
    report = compare(args.trace, args.twin)
    text = format_report(report)
    print(text, end="")
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    return 0


def _cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    out = estimate_noise(cfg, args.k)
    print(format_report(out["report"]), end="")
    if "notice" in out["report"]:
        print(f"notice: {out['report']['notice']}", file=sys.stderr)
    return 0


def _cmd_export(args) -> int:
    cfg = _config_from_args(args)
    paths = export_problem(cfg)
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gknoise",
        description="Noise propagation in Golub-Kahan bidiagonalization: runs, comparisons, noise estimates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="bidiagonalize, solve and write trace.csv + summary.txt")
    _add_experiment_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="compare methods within a trace (and against a twin run)")
    p.add_argument("trace", help="trace.csv or a run directory")
    p.add_argument("--twin", help="trace of a twin run, e.g. with the other reorth mode")
    p.add_argument("--report", help="also write the report to this file")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("estimate-noise", help="write the noise estimate s_{k+1}/phi_k(0)")
    _add_experiment_flags(p)
    p.add_argument("--k", type=int, help="iteration (default: detected k_rev)")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("export-problem", help="write A.mtx and a replayable problem.txt")
    _add_experiment_flags(p)
    p.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
