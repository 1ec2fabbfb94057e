"""
Shared plumbing for CLI command groups: registration, argument parsing
helpers and run manifests.
"""

import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from triphoton import __version__
from triphoton.core.config import settings
from triphoton.core.io import load_bundled_matrix, read_matrix, write_manifest
from triphoton.core.schemas import RunManifest, TransferMatrix

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace], Optional[Dict[str, Any]]]
ArgumentBuilder = Callable[[argparse.ArgumentParser], None]

MAX_DELAY_SAMPLES = 100000


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: ArgumentBuilder


@dataclass
class CommandGroup:
    """Collects subcommands of one topic, included into the top-level parser"""
    tag: str
    commands: List[Command] = field(default_factory=list)

    def command(self, name: str, help: str, arguments: ArgumentBuilder):
        def decorator(handler: Handler) -> Handler:
            self.commands.append(Command(name=name, help=help, handler=handler, arguments=arguments))
            return handler
        return decorator

    def include(self, subparsers: argparse._SubParsersAction) -> None:
        for command in self.commands:
            parser = subparsers.add_parser(command.name, help=command.help, description=command.help)
            command.arguments(parser)
            parser.set_defaults(handler=command.handler, group=self.tag)


# Value parsers

def parse_modes(text: str) -> Tuple[int, ...]:
    """'1,2,3' -> (1, 2, 3)"""
    try:
        modes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Mode list must be comma-separated integers, got {text!r}") from exc
    if not modes:
        raise argparse.ArgumentTypeError("Mode list is empty")
    return modes


def parse_delays(text: str) -> np.ndarray:
    """'start:stop:step' in ps, stop included when it lies on the grid"""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"Delay grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Delay grid values must be numbers, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("Delay grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count > MAX_DELAY_SAMPLES:
        raise argparse.ArgumentTypeError(f"Delay grid has {count} samples, limit is {MAX_DELAY_SAMPLES}")
    return start + step * np.arange(count)


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Expected a number, got {text!r}") from exc
    if not np.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"Expected a positive number, got {text!r}")
    return value


def seed_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Seed must be an integer, got {text!r}") from exc
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("Seed must fit in an unsigned 64-bit integer")
    return value


# Shared arguments

def add_matrix_argument(parser: argparse.ArgumentParser, flag: str = "--matrix") -> None:
    parser.add_argument(
        flag, type=Path, default=None,
        help="Matrix JSON file (default: the bundled reference device)",
    )


def add_delay_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delays", type=parse_delays, default=None,
                        help="Delay grid start:stop:step in ps (default: +-6 sigma in sigma/2 steps)")
    parser.add_argument("--sigma", type=positive_float, default=None,
                        help=f"Coherence width in ps (default {settings.SIGMA_PS})")


def add_seed_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=seed_value, default=None,
                        help="Random seed (default: TRIPHOTON_SEED, else fresh entropy)")


def add_out_argument(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--out", type=Path, required=required, default=None, help="Output path")


def load_matrix(path: Optional[Path]) -> TransferMatrix:
    if path is None:
        return load_bundled_matrix()
    return read_matrix(path)


def default_delays(sigma_ps: float) -> np.ndarray:
    return parse_delays(f"{-6.0 * sigma_ps}:{6.0 * sigma_ps}:{sigma_ps / 2.0}")


def record_run(
    args: argparse.Namespace,
    out: Path,
    inputs: Dict[str, Optional[Path]],
    parameters: Dict[str, Any],
    outputs: List[Path],
) -> Path:
    """Write `<out>.manifest.json` describing this invocation"""
    manifest = RunManifest(
        command=args.command,
        inputs={name: str(path) for name, path in inputs.items() if path is not None},
        parameters=parameters,
        tool_version=__version__,
        outputs=[str(path) for path in outputs],
    )
    return write_manifest(manifest, out)
