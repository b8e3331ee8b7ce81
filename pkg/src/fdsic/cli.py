"""``fd-sic`` command line writing simulation and budget results as CSV."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from fdsic.errors import ConfigurationError, EstimationError, InvalidInputError
from fdsic.simulation import (
    SweepVariable,
    budget_csv,
    load_scenario,
    run_csv,
    run_scenario,
    run_sweep,
    sweep_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATION = 3


def parse_values(text: str) -> list:
    """Comma separated numbers, e.g. ``0,2.5,5``."""
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse sweep values {text!r}") from None
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    return values


def parse_range(text: str) -> np.ndarray:
    """``lo:hi:step`` with ``hi`` included when it falls on the grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"range must look like lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"cannot parse range {text!r}") from None
    if not step > 0 or hi < lo:
        raise ConfigurationError(f"range {text!r} needs step > 0 and hi >= lo")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc}") from None


def _cmd_run(args):
    sc = load_scenario(args.scenario)
    _write(args.out, run_csv(sc, run_scenario(sc, n_jobs=args.jobs)))


def _cmd_sweep(args):
    sc = load_scenario(args.scenario)
    rows = run_sweep(sc, args.variable, parse_values(args.values), n_jobs=args.jobs)
    _write(args.out, sweep_csv(rows))


def _cmd_budget(args):
    sc = load_scenario(args.scenario)
    _write(args.out, budget_csv(sc, parse_range(args.tx_range)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fd-sic",
        description="Full-duplex self-interference cancellation simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file of key = value lines")
        p.add_argument("--out", required=True, help="output CSV path, or - for stdout")

    p = sub.add_parser("run", help="Monte Carlo run of one scenario, one row per realization")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter, both cancellers against the SI-free reference")
    common(p)
    p.add_argument("--variable", required=True, choices=[v.value for v in SweepVariable])
    p.add_argument("--values", required=True, help="comma separated values, e.g. 0,5,10")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("budget", help="analytic power levels versus transmit power")
    common(p)
    p.add_argument("--tx-range", required=True, help="lo:hi:step in dBm, e.g. -10:30:1")
    p.set_defaults(func=_cmd_budget)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("fd-sic: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args)
    except (ConfigurationError, InvalidInputError) as exc:
        print(f"fd-sic: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationError as exc:
        print(f"fd-sic: estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
