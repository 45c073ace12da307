#!/usr/bin/env python3
"""
Main entry point for the stable-lab experiment runner
"""

import argparse
import logging
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.lab.app import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR, create_lab
from src.lab.config import config

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stable-lab", description="Monte Carlo experiments for stable-driven SDEs")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the experiment described by a YAML config")
    run.add_argument("config", type=Path)
    run.add_argument("--plot", action="store_true", help="also write an SVG plot")
    run.add_argument("--threads", type=int, default=None, help="worker processes")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--out", type=Path, default=None, help="output directory")

    validate = commands.add_parser("validate", help="report every problem in a config")
    validate.add_argument("config", type=Path)

    commands.add_parser("list", help="list the registered experiments")
    return parser


def main(argv=None) -> int:
    """Main function to run the lab"""
    args = build_parser().parse_args(argv)

    # Validate configuration
    if not config.validate():
        logger.error("Invalid environment configuration. Exiting...")
        return EXIT_CONFIG_ERROR

    lab = create_lab()
    if args.command == "list":
        for line in lab.describe():
            print(line)
        return EXIT_OK

    if args.command == "validate":
        diagnostics = lab.validate(args.config)
        for diagnostic in diagnostics:
            print(diagnostic)
        if not diagnostics:
            print(f"{args.config}: ok")
        return EXIT_CONFIG_ERROR if diagnostics else EXIT_OK

    return lab.run(args.config, plot=args.plot, threads=args.threads, seed=args.seed, out=args.out)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        sys.exit(EXIT_RUNTIME_ERROR)
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(EXIT_RUNTIME_ERROR)
