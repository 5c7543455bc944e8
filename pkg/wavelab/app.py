"""wavelab — command-line entry point.

Parses the command and flags, installs rich logging, loads the configuration,
dispatches to the experiment and renders its report. Exit status: 0 when every
criterion passes, 1 when one fails or a run-time check raises, 2 on
configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler

from wavelab import __version__
from wavelab.config import dump_config, load_config
from wavelab.errors import ConfigError, IoError, WaveLabError
from wavelab.experiments import COMMANDS
from wavelab.widgets import report_table

logger = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_FAILED: int = 1
EXIT_USAGE: int = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavelab",
        description="Gravity-capillary water waves with constant vorticity: "
        "simulation and paradifferential order checks.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run.")
    parser.add_argument("--config", type=Path, default=None, metavar="PATH",
                        help="JSON configuration (defaults for every missing key).")
    parser.add_argument("--out", type=Path, default=None, metavar="DIR",
                        help="Output directory (overrides output.out_dir).")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="Dotted assignment such as params.gamma=2; repeatable.")
    parser.add_argument("--quiet", action="store_true", help="Warnings only; no report table.")
    parser.add_argument("--verbose", action="store_true", help="Debug logging.")
    parser.add_argument("--failed-only", action="store_true",
                        help="Show only failing criteria in the report table.")
    parser.add_argument("--print-config", action="store_true",
                        help="Print the resolved configuration and exit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def setup_logging(console: Console, quiet: bool = False, verbose: bool = False) -> None:
    level = logging.WARNING if quiet else logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=True)],
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    args = build_parser().parse_args(argv)
    console = console or Console()
    err = Console(stderr=True)
    setup_logging(err, args.quiet, args.verbose)

    try:
        cfg = load_config(args.config, args.override)
    except (ConfigError, IoError) as exc:
        err.print(f"[bold red]config error:[/bold red] {exc}")
        return EXIT_USAGE
    if args.print_config:
        console.print_json(dump_config(cfg))
        return EXIT_OK

    out_dir = args.out if args.out is not None else Path(cfg.output.out_dir)
    logger.info("Running %s into %s", args.command, out_dir)
    try:
        report = COMMANDS[args.command](cfg, out_dir)
        path = report.write(out_dir)
    except ConfigError as exc:
        err.print(f"[bold red]config error:[/bold red] {exc}")
        return EXIT_USAGE
    except IoError as exc:
        err.print(f"[bold red]i/o error:[/bold red] {exc}")
        return EXIT_USAGE
    except WaveLabError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_FAILED

    if not args.quiet:
        console.print(report_table(report, only_failed=args.failed_only))
        console.print(f"report: {path}")
    return report.exit_status


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
