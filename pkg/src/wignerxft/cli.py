"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy,
4 statistical check failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .checks import run_all
from .config import ConfigError, parse_config
from .errors import NumericalDegeneracyError, XftError
from .runner import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_DEGENERATE,
    EXIT_OK,
    PLOT_KINDS,
    emit_plot_data,
    run_experiment,
    run_sweep,
)

log = logging.getLogger("wignerxft")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerxft", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one protocol and write result files")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", help="output directory (default: output_dir from the config)")

    sweep = sub.add_parser("sweep", help="sweep hbar or the coupling strength")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--axis", required=True, choices=("hbar", "lambda"))
    sweep.add_argument("--out")

    verify = sub.add_parser("verify", help="run the full verification suite")
    verify.add_argument("--quick", action="store_true", help="smaller samples, no runtime budgets")

    plot = sub.add_parser("plot-data", help="write plot-ready columns from a finished run")
    plot.add_argument("--manifest", required=True)
    plot.add_argument("--kind", required=True, help=f"one of: {', '.join(PLOT_KINDS)}")
    plot.add_argument("--out")
    return parser


def _simulate(args) -> int:
    cfg = parse_config(args.config)
    manifest = run_experiment(cfg, args.out)
    xft = manifest.results["xft"]
    if xft.get("slope") is not None:
        print(f"slope {xft['slope']:.6g} +- {xft['stderr']:.3g}  (dbeta_omega {xft['delta_beta_omega']:.6g})")
    print(f"status {manifest.status}; results in {args.out or cfg.output_dir}")
    return manifest.exit_code


def _sweep(args) -> int:
    cfg = parse_config(args.config)
    manifest = run_sweep(cfg, args.axis, args.out)
    print(f"status {manifest.status}; results in {args.out or cfg.output_dir}")
    return manifest.exit_code


def _verify(args) -> int:
    results = run_all(quick=args.quick)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def _plot(args) -> int:
    try:
        path = emit_plot_data(args.manifest, args.kind, args.out)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    handler = {"simulate": _simulate, "sweep": _sweep, "verify": _verify, "plot-data": _plot}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalDegeneracyError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except XftError as exc:
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ValueError) else EXIT_DEGENERATE


if __name__ == "__main__":
    raise SystemExit(main())
