"""
Command-line interface - one parser with the command groups included
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from triphoton import __version__
from triphoton.core.errors import TriphotonError
from triphoton.core.schemas import ErrorResponse

# Import specific command groups
from triphoton.cli.analysis import router as analysis_router
from triphoton.cli.simulate import router as simulate_router
from triphoton.cli.tomography import router as tomography_router

logger = logging.getLogger(__name__)

COMMAND_GROUPS = (simulate_router, tomography_router, analysis_router)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triphoton",
        description="Multiphoton interference analysis for multiport interferometers",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for group in COMMAND_GROUPS:
        group.include(subparsers)
    return parser


def _report(error: ErrorResponse) -> None:
    print(error.model_dump_json(), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; 0 on success, 2 for bad input, 3 for numerical failure"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        payload = args.handler(args)
    except TriphotonError as exc:
        logger.error("❌ %s failed: %s", args.command, exc.message)
        _report(ErrorResponse(error=exc.message, detail=exc.detail, code=exc.code))
        return exc.exit_code
    except ValidationError as exc:
        logger.error("❌ %s failed: invalid input", args.command)
        _report(ErrorResponse(error="Invalid input", detail=str(exc), code="validation_error"))
        return 2

    if payload is not None:
        print(json.dumps(payload, indent=2))
    return 0
