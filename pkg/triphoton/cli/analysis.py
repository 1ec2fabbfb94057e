"""
Curve fitting and design scoring commands.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from triphoton.cli.common import CommandGroup, add_out_argument, add_seed_argument, record_run
from triphoton.core.config import settings
from triphoton.core.io import read_matrix, read_scan, write_fit_result, write_json
from triphoton.core.schemas import TargetSpec
from triphoton.core.seeding import resolve_seed
from triphoton.engine.design_eval import (
    column_transmission,
    fom_overall,
    fom_values,
    ideal_tritter,
    splitting_ratios,
)
from triphoton.engine.fitting import fit_gaussian, visibility_uncertainty

logger = logging.getLogger(__name__)

router = CommandGroup(tag="analysis")


def _fit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scan", type=Path, required=True, help="Delay scan CSV delay_ps,value")
    parser.add_argument("--mode", choices=["dip", "peak", "auto"], default="auto")
    parser.add_argument("--poisson-weights", action="store_true", help="Weight residuals by 1/sqrt(counts)")
    parser.add_argument("--resamples", type=int, default=None,
                        help=f"Bootstrap resamples for integer counts (default {settings.RESAMPLES})")
    parser.add_argument("--no-bootstrap", action="store_true", help="Report the fit covariance only")
    add_seed_argument(parser)
    add_out_argument(parser)


def _fom_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--matrix", type=Path, required=True, help="Candidate matrix JSON")
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--target", type=Path, help="Target matrix JSON")
    target.add_argument("--tritter", action="store_true", help="Score against the ideal tritter")
    add_out_argument(parser, required=False)


@router.command("fit", help="Gaussian dip/peak fit of a delay scan", arguments=_fit_arguments)
def fit_command(args: argparse.Namespace) -> Dict[str, Any]:
    scan = read_scan(args.scan)
    result = fit_gaussian(scan, mode=args.mode, poisson_weights=args.poisson_weights)
    summary: Dict[str, Any] = result.model_dump()

    seed = None
    integral = bool(np.all(scan.values == np.round(scan.values)))
    if integral and not args.no_bootstrap:
        seed = resolve_seed(args.seed)
        mean, sigma = visibility_uncertainty(scan, resamples=args.resamples, seed=seed, mode=result.mode)
        summary["bootstrap"] = {"mean": mean, "sigma": sigma}
        logger.info("Fitted visibility %.4f, bootstrap %.4f +- %.4f", result.interference_visibility, mean, sigma)
    else:
        logger.info("Fitted visibility %.4f", result.interference_visibility)

    written = write_fit_result(result, args.out)
    outputs = [written]
    if "bootstrap" in summary:
        outputs.append(write_json(summary["bootstrap"], args.out.with_name(args.out.stem + ".bootstrap.json")))
    record_run(
        args, args.out, {"scan": args.scan},
        {"mode": args.mode, "poisson_weights": args.poisson_weights,
         "resamples": args.resamples, "seed": seed},
        outputs,
    )
    return summary


@router.command("fom", help="Per-input and overall figure of merit against a target", arguments=_fom_arguments)
def fom_command(args: argparse.Namespace) -> Dict[str, Any]:
    candidate = read_matrix(args.matrix)
    if args.tritter:
        target = TargetSpec(target=ideal_tritter(), label="ideal tritter")
    else:
        target = TargetSpec(target=read_matrix(args.target), label=str(args.target))
    per_input = fom_values(candidate, target)
    payload = {
        "target": target.label,
        "per_input": per_input,
        "overall": fom_overall(candidate, target),
        "transmission": column_transmission(candidate).tolist(),
        "splitting_ratios": splitting_ratios(candidate).tolist(),
    }
    if args.out is not None:
        written = write_json(payload, args.out)
        record_run(args, args.out, {"matrix": args.matrix, "target": args.target},
                   {"tritter": args.tritter}, [written])
    return payload
