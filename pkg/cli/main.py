# =====================
# cli/main.py
# Command-line entry point: python cli/main.py <subcommand> [options]
# =====================

import sys
from pathlib import Path

# Adjust the Python path to include the project root
project_root = Path(__file__).resolve().parents[1]
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import argparse
import logging
from typing import Optional, Sequence

from cli import commands
from cli.run_config import PRESETS, load_run_config
from common.errors import ConfigError, RodError
from common.utils import setup_logging

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run config")
    common.add_argument("--preset", choices=sorted(PRESETS), help="Named base config")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config value (repeatable)",
    )
    common.add_argument("--output-dir", help="Directory for output files")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--threads", type=int, help="Parallel workers for sweeps")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--quiet", action="store_true", help="Warnings only, no progress bars")
    noise.add_argument("--verbose", action="store_true", help="Debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="rod", description="RoD early-warning statistic: simulation, detection, experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="Simulate one trajectory to CSV")
    p.add_argument("--out", help="Trajectory CSV path")

    p = sub.add_parser("sample", parents=[common], help="Sample the configured trajectory")
    p.add_argument("--out", help="Sampled series CSV path")

    p = sub.add_parser("detect", parents=[common], help="Run the detector on a t,x1,... CSV")
    p.add_argument("series", help="Sampled series CSV")
    p.add_argument("--window", help="Trailing window length, or 'prefix'")
    p.add_argument("--tandem", help="none, sd, rmssd or range:<lo>:<hi>")
    p.add_argument("--out", help="Events JSON path (default: stdout)")

    p = sub.add_parser("sweep", parents=[common], help="Short-series TP/FP sweep")
    p.add_argument("--out", help="Rate table CSV path")

    sub.add_parser("classify", parents=[common], help="High-frequency classifier ROC/AUC")

    p = sub.add_parser("validate-prop1", parents=[common], help="RoD^2 vs 2(1 - rho) on AR(1)")
    p.add_argument("--out", help="Result CSV path")

    sub.add_parser("demo", parents=[common], help="Hopf normal-form demonstration")
    return parser


def _flag_overrides(args: argparse.Namespace) -> dict:
    extra: dict = {}
    if args.seed is not None:
        extra.setdefault("experiment", {})["master_seed"] = args.seed
    if args.threads is not None:
        extra.setdefault("experiment", {})["threads"] = args.threads
    if args.output_dir is not None:
        extra["output"] = {"dir": args.output_dir}
    if getattr(args, "window", None) is not None:
        extra.setdefault("detection", {})["window"] = args.window
    if getattr(args, "tandem", None) is not None:
        extra.setdefault("detection", {})["tandem"] = args.tandem
    return extra


def run(args: argparse.Namespace) -> None:
    preset = args.preset
    if args.command == "demo" and preset is None and args.config is None:
        preset = "hopf-demo"
    config = load_run_config(args.config, preset, args.overrides, _flag_overrides(args))
    logging.debug(f"🔧 config_hash={config.hash}")
    progress = not args.quiet

    if args.command == "simulate":
        commands.cmd_simulate(config, args.out)
    elif args.command == "sample":
        commands.cmd_sample(config, args.out)
    elif args.command == "detect":
        commands.cmd_detect(config, args.series, args.out)
    elif args.command == "sweep":
        commands.cmd_sweep(config, args.out, progress=progress)
    elif args.command == "classify":
        commands.cmd_classify(config, progress=progress)
    elif args.command == "validate-prop1":
        commands.cmd_validate_prop1(config, args.out)
    elif args.command == "demo":
        commands.cmd_demo(config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

    setup_logging("DEBUG" if args.verbose else "WARNING" if args.quiet else None)
    try:
        run(args)
    except ConfigError as e:
        logging.error(f"❌ Config error: {e}")
        logging.debug("Traceback", exc_info=True)
        return EXIT_CONFIG
    except RodError as e:
        logging.error(f"❌ {type(e).__name__}: {e}")
        logging.debug("Traceback", exc_info=True)
        return EXIT_RUNTIME
    except OSError as e:
        logging.error(f"💾 IO error: {e}")
        logging.debug("Traceback", exc_info=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
