"""
Delay-scan simulation commands.
"""

import argparse
import logging
from typing import Any, Dict

from triphoton.cli.common import (
    CommandGroup,
    add_delay_arguments,
    add_matrix_argument,
    add_out_argument,
    add_seed_argument,
    default_delays,
    load_matrix,
    parse_modes,
    positive_float,
    record_run,
)
from triphoton.core.config import settings
from triphoton.core.io import scan_metadata_path, write_scan
from triphoton.core.seeding import resolve_seed
from triphoton.engine.distinguishability import (
    hom_curve,
    sample_counts,
    scan_endpoints,
    threefold_curve,
    visibility_three,
    visibility_two,
)

logger = logging.getLogger(__name__)

router = CommandGroup(tag="simulation")


def _scan_arguments(parser: argparse.ArgumentParser, inputs: str, outputs: str) -> None:
    add_matrix_argument(parser)
    parser.add_argument("--inputs", type=parse_modes, default=parse_modes(inputs),
                        help=f"Input modes (default {inputs})")
    parser.add_argument("--outputs", type=parse_modes, default=parse_modes(outputs),
                        help=f"Output modes (default {outputs})")
    add_delay_arguments(parser)
    parser.add_argument("--counts", type=positive_float, default=None,
                        help="Large-delay count level; writes Poisson-sampled counts instead of rates")
    add_seed_argument(parser)
    add_out_argument(parser)


def _hom_arguments(parser: argparse.ArgumentParser) -> None:
    _scan_arguments(parser, "1,2", "1,2")


def _threefold_arguments(parser: argparse.ArgumentParser) -> None:
    _scan_arguments(parser, "1,2,3", "1,2,3")
    parser.add_argument("--delayed", type=int, default=1,
                        help="Input mode whose photon is delayed (default 1)")


def _finish(args: argparse.Namespace, scan, parameters: Dict[str, Any]) -> Dict[str, Any]:
    seed = None
    if args.counts is not None:
        seed = resolve_seed(args.seed)
        scan = sample_counts(scan, args.counts, seed=seed)
    written = write_scan(scan, args.out)
    parameters.update(
        inputs=list(scan.inputs),
        outputs=list(scan.outputs),
        sigma_ps=scan.sigma_ps,
        delays=scan.delays.tolist(),
        counts=args.counts,
        seed=seed,
    )
    record_run(args, args.out, {"matrix": args.matrix}, parameters,
               [written, scan_metadata_path(written)])
    return {"out": str(written), "samples": int(scan.delays.size)}


@router.command("simulate-hom", help="Two-photon coincidence curve against delay", arguments=_hom_arguments)
def simulate_hom(args: argparse.Namespace) -> Dict[str, Any]:
    M = load_matrix(args.matrix)
    sigma = args.sigma if args.sigma is not None else settings.SIGMA_PS
    delays = args.delays if args.delays is not None else default_delays(sigma)
    scan = hom_curve(M, args.inputs, args.outputs, delays, sigma_ps=sigma)
    c_inf, c_zero = scan_endpoints(scan)
    visibility = visibility_two(c_inf, c_zero)
    logger.info("HOM %s -> %s: endpoint visibility %.4f", scan.inputs, scan.outputs, visibility)
    summary = _finish(args, scan, {})
    summary["visibility"] = visibility
    return summary


@router.command(
    "simulate-threefold",
    help="Three-photon coincidence curve with one photon delayed",
    arguments=_threefold_arguments,
)
def simulate_threefold(args: argparse.Namespace) -> Dict[str, Any]:
    M = load_matrix(args.matrix)
    sigma = args.sigma if args.sigma is not None else settings.SIGMA_PS
    delays = args.delays if args.delays is not None else default_delays(sigma)
    scan = threefold_curve(M, args.inputs, args.outputs, args.delayed, delays, sigma_ps=sigma)
    c_inf, c_zero = scan_endpoints(scan)
    visibility = visibility_three(c_inf, c_zero)
    logger.info("Three-photon curve, input %d delayed: endpoint visibility %.4f", args.delayed, visibility)
    summary = _finish(args, scan, {"delayed": args.delayed})
    summary["visibility"] = visibility
    return summary
