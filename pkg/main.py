"""
Entry point for the triphoton command-line toolkit.

Simulates multiphoton interference in multiport interferometers, reconstructs
transfer matrices from counting data, fits delay scans and scores designs.
"""

import logging
import sys

from triphoton.core.config import settings
from triphoton.cli import main as cli_main

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format=settings.LOG_FORMAT,
    filename=settings.LOG_FILE,
)
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    sys.exit(cli_main())
