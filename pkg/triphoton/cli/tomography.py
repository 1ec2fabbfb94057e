"""
Reconstruction, prediction, Monte Carlo and synthetic dataset commands.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from triphoton.cli.common import (
    CommandGroup,
    add_matrix_argument,
    add_out_argument,
    add_seed_argument,
    load_matrix,
    positive_float,
    record_run,
)
from triphoton.core.config import settings
from triphoton.core.io import (
    read_singles,
    read_visibilities,
    write_json,
    write_singles,
    write_tomography_result,
    write_visibilities,
)
from triphoton.core.schemas import TomographyResult, TransferMatrix
from triphoton.core.seeding import resolve_seed
from triphoton.engine.distinguishability import threefold_visibility
from triphoton.engine.tomography import (
    monte_carlo,
    predict_visibilities,
    q_vis,
    reconstruct,
    synthesize_dataset,
)

logger = logging.getLogger(__name__)

router = CommandGroup(tag="tomography")


def _data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--singles", type=Path, required=True, help="Singles CSV output,input,counts")
    parser.add_argument("--visibilities", type=Path, required=True, help="Visibility CSV i,j,l,m,V,sigma,c0,cinf")
    add_seed_argument(parser)
    add_out_argument(parser)


def _reconstruct_arguments(parser: argparse.ArgumentParser) -> None:
    _data_arguments(parser)
    parser.add_argument("--montecarlo", type=int, default=None, metavar="N",
                        help="Propagate counting noise with N Poisson resamples")


def _montecarlo_arguments(parser: argparse.ArgumentParser) -> None:
    _data_arguments(parser)
    parser.add_argument("--resamples", type=int, default=None,
                        help=f"Poisson resamples (default {settings.RESAMPLES})")


def _predict_arguments(parser: argparse.ArgumentParser) -> None:
    add_matrix_argument(parser)
    add_out_argument(parser)
    parser.add_argument("--threefold-out", type=Path, default=None,
                        help="Three-photon visibility JSON (default: <out stem>.threefold.json)")


def _dataset_arguments(parser: argparse.ArgumentParser) -> None:
    add_matrix_argument(parser)
    parser.add_argument("--counts", type=positive_float, default=None,
                        help=f"Mean two-photon C(inf) counts (default {settings.PAIR_COUNT_LEVEL:g})")
    parser.add_argument("--singles-counts", type=positive_float, default=None,
                        help=f"Singles counts per input (default {settings.SINGLES_COUNT_LEVEL:g})")
    parser.add_argument("--poisson", action="store_true", help="Draw Poisson counts instead of expected values")
    add_seed_argument(parser)
    parser.add_argument("--out", type=Path, required=True,
                        help="Directory receiving singles.csv and visibilities.csv")


def _run_reconstruction(args: argparse.Namespace, resamples: Optional[int]) -> Dict[str, Any]:
    counts = read_singles(args.singles)
    records = read_visibilities(args.visibilities)
    seed = None
    if resamples is None:
        result: TomographyResult = reconstruct(counts, records)
    else:
        seed = resolve_seed(args.seed)
        result = monte_carlo(counts, records, resamples=resamples, seed=seed)

    measured_keys = {record.key for record in records}
    predicted = [r for r in predict_visibilities(result.matrix) if r.key in measured_keys]
    agreement = q_vis(records, predicted)
    logger.info("Reconstruction residual %.3e, Q_vis %.3e", result.residual, agreement)

    written = write_tomography_result(result, args.out)
    record_run(
        args, args.out,
        {"singles": args.singles, "visibilities": args.visibilities},
        {"resamples": resamples, "seed": seed},
        [written],
    )
    return {
        "out": str(written),
        "q_vis": agreement,
        "residual": result.residual,
        "resamples": result.resample_count,
        "failed_resamples": result.failed_resamples,
    }


@router.command(
    "reconstruct",
    help="Transfer matrix from singles counts and two-photon visibilities",
    arguments=_reconstruct_arguments,
)
def reconstruct_command(args: argparse.Namespace) -> Dict[str, Any]:
    return _run_reconstruction(args, args.montecarlo)


@router.command(
    "montecarlo",
    help="Reconstruction with Poisson Monte Carlo uncertainties",
    arguments=_montecarlo_arguments,
)
def montecarlo_command(args: argparse.Namespace) -> Dict[str, Any]:
    resamples = settings.RESAMPLES if args.resamples is None else args.resamples
    return _run_reconstruction(args, resamples)


def _threefold_summary(M: TransferMatrix) -> Optional[Dict[str, float]]:
    if M.rows < 3 or M.cols < 3:
        return None
    return {
        "fully_distinguishable": threefold_visibility(M),
        "input_1_delayed": threefold_visibility(M, delayed_inputs=(1,)),
    }


@router.command(
    "predict",
    help="Two-photon visibilities of every port combination and the three-photon visibility",
    arguments=_predict_arguments,
)
def predict_command(args: argparse.Namespace) -> Dict[str, Any]:
    M = load_matrix(args.matrix)
    records = predict_visibilities(M)
    written = write_visibilities(records, args.out)
    outputs = [written]

    threefold = _threefold_summary(M)
    if threefold is not None:
        threefold_path = args.threefold_out or args.out.with_name(args.out.stem + ".threefold.json")
        outputs.append(write_json(threefold, threefold_path))
    record_run(args, args.out, {"matrix": args.matrix}, {}, outputs)
    return {"out": str(written), "records": len(records), "threefold": threefold}


@router.command(
    "make-paper-dataset",
    help="Synthetic singles and visibility CSVs from the reference device",
    arguments=_dataset_arguments,
)
def make_dataset_command(args: argparse.Namespace) -> Dict[str, Any]:
    M = load_matrix(args.matrix)
    seed = resolve_seed(args.seed) if args.poisson else None
    counts, records = synthesize_dataset(
        M,
        singles_level=args.singles_counts,
        pair_level=args.counts,
        poisson=args.poisson,
        seed=seed,
    )
    singles_path = write_singles(counts, args.out / "singles.csv")
    visibilities_path = write_visibilities(records, args.out / "visibilities.csv")
    record_run(
        args, args.out,
        {"matrix": args.matrix},
        {
            "counts": args.counts if args.counts is not None else settings.PAIR_COUNT_LEVEL,
            "singles_counts": (
                args.singles_counts if args.singles_counts is not None else settings.SINGLES_COUNT_LEVEL
            ),
            "poisson": args.poisson,
            "seed": seed,
        },
        [singles_path, visibilities_path],
    )
    logger.info("📊 Wrote %d visibility records to %s", len(records), visibilities_path)
    return {"singles": str(singles_path), "visibilities": str(visibilities_path)}
