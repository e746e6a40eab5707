"""``bohmpair`` command-line front end.

Exit codes: 0 success, 2 config error, 3 regime violation (with
``--strict-regime``), 4 abort-quota breach, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import Scenario, load_config
from .errors import AbortQuotaExceeded, ConfigError, RegimeViolation
from .export import SCHEMA_VERSION, jsonable, write_json
from .scenarios import COMMANDS, PRESETS, RunManifest, default_out_dir, emit_plot_data, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_ABORT_QUOTA = 4
EXIT_IO = 5


def _on_off(text):
    value = text.lower()
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bohmpair",
        description="Bohmian trajectories vs |psi|^2 predictions for particle pairs at a double slit.")
    parser.add_argument("--version", action="version",
                        version=f"bohmpair {__version__} (output schema {SCHEMA_VERSION})")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", choices=[s.value for s in Scenario], default="fig1")
    common.add_argument("--config", type=Path, help="JSON file overriding preset parameters")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=10_000, help="ensemble size (pairs)")
    common.add_argument("--selective", type=_on_off, default=None,
                        help="on/off; default follows the scenario preset")
    common.add_argument("--strict-regime", action="store_true",
                        help="fail (exit 3) if a regime condition is violated")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (default $BOHMPAIR_OUT or ./bohmpair-out)")
    common.add_argument("--tol", type=float, default=1e-9, help="integrator tolerance")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--dump-trajectories", type=int, default=None, metavar="N",
                        help="also write sampled paths of the first N trajectories")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "run the Bohmian ensemble",
        "predict": "compute |psi|^2 patterns only",
        "compare": "simulate, predict and report divergences",
        "validate": "check the regime conditions only",
        "oracles": "print closed-form values only",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def manifest_from_args(args) -> RunManifest:
    scenario = Scenario(args.scenario)
    cfg, src, selective = PRESETS[scenario]
    if args.config is not None:
        cfg, src = load_config(args.config, cfg, src)
    return RunManifest(
        scenario=scenario, config=cfg, source=src, n=args.n, tol=args.tol,
        selective=selective if args.selective is None else args.selective,
        out_dir=args.out or default_out_dir(), seed=args.seed, workers=args.workers,
        strict_regime=args.strict_regime, dump_trajectories=args.dump_trajectories,
    )


def _print_brief(report):
    summary = report.summary()
    if report.command in ("validate", "oracles"):
        key = "regime" if report.command == "validate" else "oracles"
        print(json.dumps(jsonable(summary[key]), indent=2))
        return
    for name, check in summary["checks"].items():
        mark = "PASS" if check["passed"] else "FAIL"
        print(f"{mark} {name}: {check['value']:.6g} (threshold {check['threshold']:.6g})")
    for name, div in summary["divergence"].items():
        print(f"{name}: KS={div['ks']:.4g} TV={div['tv']:.4g} chi2 p={div['chi2_pvalue']:.3g}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = manifest_from_args(args)
        report = run_scenario(manifest, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeViolation as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except AbortQuotaExceeded as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_ABORT_QUOTA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "oracles":
            out = Path(manifest.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_json(out / "oracles.json", {"schema_version": SCHEMA_VERSION,
                                              "oracles": report.summary()["oracles"]})
        emit_plot_data(report)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _print_brief(report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
