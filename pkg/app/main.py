"""
Main command-line entry point
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.commands import COMMAND_MODULES
from app.config import settings
from app.utils.errors import CardiacPipelineError, EXIT_USAGE, UsageError
from app.utils.logger import setup_logging

logger = logging.getLogger(__name__)


class PipelineArgumentParser(argparse.ArgumentParser):
    """Reports usage problems as UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = PipelineArgumentParser(
        prog="cardiac",
        description="Cine-MR segmentation to diagnosis: phantoms, metrics, features, selection, classification",
    )
    parser.add_argument("--config", default=None, help="Pipeline config JSON")
    parser.add_argument("--seed", type=int, default=None, help="Root seed (overrides the config)")
    parser.add_argument("--paper-order", action="store_true", help="Select features once on all subjects before CV")
    parser.add_argument("--connectivity", type=int, choices=(6, 26), default=None)
    parser.add_argument("--n-jobs", type=int, default=None, help="Parallel workers for subjects and folds")
    parser.add_argument("--log-level", default=None, help=f"Logging level (default {settings.LOG_LEVEL})")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=PipelineArgumentParser)
    for module in COMMAND_MODULES:
        module.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "handler", None):
            raise UsageError("No command given; see --help")
        setup_logging(
            log_dir=settings.LOG_DIR,
            retention_days=settings.LOG_RETENTION_DAYS,
            level=args.log_level or settings.LOG_LEVEL,
            to_file=settings.LOG_TO_FILE,
        )
        logger.info(f"Running {args.command}")
        return args.handler(args)
    except CardiacPipelineError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return EXIT_USAGE
