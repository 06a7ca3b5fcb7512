"""Command-line entry point ``lab``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from restrictlab.constants import DEFAULT_ATOM_BUDGET, __version__
from restrictlab.errors import LabError
from restrictlab.io import load_spec, measure_from_spec, read_measure_csv, write_ft_csv, write_measure_csv
from restrictlab.measures import SamplingPlan, audit_dimension
from restrictlab.oscillatory import ft_batch
from restrictlab.runner import (
    EXIT_CONFIG,
    EXIT_PASS,
    ExperimentConfig,
    exit_status,
    format_report,
    report,
    run,
)


def _load_measure(path: str, budget: int):
    if path.endswith(".json"):
        return measure_from_spec(load_spec(path), budget)
    return read_measure_csv(path, budget)


def cmd_run(args) -> int:
    manifest = None
    try:
        cfg = ExperimentConfig.load(args.config)
        manifest = run(cfg)
    except (LabError, MemoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_status(exc)
    print(json.dumps(manifest.verdicts, sort_keys=True))
    print(f"outputs in {cfg.output_dir}")
    return exit_status(None, manifest)


def cmd_report(args) -> int:
    try:
        rows = report(args.dirs)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(format_report(rows))
    return EXIT_PASS


def cmd_synth(args) -> int:
    try:
        measure = measure_from_spec(load_spec(args.spec), args.atom_budget)
        write_measure_csv(measure, args.output)
    except (LabError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_status(exc) if isinstance(exc, LabError) else EXIT_CONFIG
    print(f"{measure.n_atoms} atoms written to {args.output}")
    return EXIT_PASS


def cmd_audit(args) -> int:
    try:
        measure = _load_measure(args.measure, args.atom_budget)
        rep = audit_dimension(measure, args.alpha, plan=SamplingPlan(max_atom_centers=args.max_centers))
    except (LabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_status(exc) if isinstance(exc, LabError) else EXIT_CONFIG
    print(json.dumps(rep.to_json(), indent=2))
    return EXIT_PASS


def cmd_ft(args) -> int:
    try:
        measure = _load_measure(args.measure, args.atom_budget)
        pts = np.loadtxt(args.points, delimiter=",", skiprows=1, ndmin=2)
        if pts.shape[1] != 2:
            print("error: points file needs columns xi1,xi2", file=sys.stderr)
            return EXIT_CONFIG
        write_ft_csv(pts, ft_batch(measure, pts), args.output)
    except (LabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_status(exc) if isinstance(exc, LabError) else EXIT_CONFIG
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="Fourier restriction experiments for fractal measures.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a JSON config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="tabulate finished runs")
    p.add_argument("dirs", nargs="*")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth-measure", help="build a measure from a spec JSON and write it as CSV")
    p.add_argument("spec")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--atom-budget", type=int, default=DEFAULT_ATOM_BUDGET)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("audit-dim", help="ball-mass audit of a measure CSV (or spec JSON)")
    p.add_argument("measure")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--max-centers", type=int, default=None)
    p.add_argument("--atom-budget", type=int, default=DEFAULT_ATOM_BUDGET)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("ft", help="transform of a measure at frequencies from a CSV with header xi1,xi2")
    p.add_argument("measure")
    p.add_argument("--points", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--atom-budget", type=int, default=DEFAULT_ATOM_BUDGET)
    p.set_defaults(func=cmd_ft)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
