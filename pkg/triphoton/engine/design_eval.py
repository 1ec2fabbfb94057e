"""
Target matrices and figure-of-merit scoring of candidate devices.
"""

import logging
from typing import List, Union

import numpy as np

from triphoton.core.errors import DimensionError, ParameterError
from triphoton.core.schemas import TargetSpec, TransferMatrix

logger = logging.getLogger(__name__)


def dft_target(n: int) -> TransferMatrix:
    """Entry (l, i) = exp(2 pi i (l-1)(i-1) / n) / sqrt(n)"""
    if n < 2:
        raise ParameterError(f"DFT target needs n >= 2, got {n}")
    indices = np.arange(n)
    return TransferMatrix(entries=np.exp(2j * np.pi * np.outer(indices, indices) / n) / np.sqrt(n))


def ideal_tritter() -> TransferMatrix:
    """Balanced 3x3 multiport, (1/sqrt 3) [[1,1,1],[1,w,w*],[1,w*,w]] with w = exp(2 pi i/3)"""
    return dft_target(3)


def _as_target(target: Union[TargetSpec, TransferMatrix]) -> TargetSpec:
    if isinstance(target, TargetSpec):
        return target
    return TargetSpec(target=target)


def fom_per_input(
    candidate: TransferMatrix,
    target: Union[TargetSpec, TransferMatrix],
    input_mode: int,
) -> float:
    """|sum_l conj(T_li) C_li|, the overlap of candidate column i with the target column"""
    spec = _as_target(target)
    if candidate.shape != spec.target.shape:
        raise DimensionError(
            f"Candidate {candidate.shape} and target {spec.target.shape} differ in shape"
        )
    if not 1 <= input_mode <= candidate.cols:
        raise ParameterError(f"Input mode {input_mode} out of range 1..{candidate.cols}")
    column = input_mode - 1
    return float(abs(np.vdot(spec.target.entries[:, column], candidate.entries[:, column])))


def fom_values(candidate: TransferMatrix, target: Union[TargetSpec, TransferMatrix]) -> List[float]:
    spec = _as_target(target)
    return [fom_per_input(candidate, spec, i) for i in range(1, candidate.cols + 1)]


def fom_overall(candidate: TransferMatrix, target: Union[TargetSpec, TransferMatrix]) -> float:
    """Arithmetic mean of the per-input figures of merit"""
    values = fom_values(candidate, target)
    overall = float(np.mean(values))
    logger.debug("Per-input FoM %s, overall %.4f", ["%.4f" % v for v in values], overall)
    return overall


def column_transmission(M: TransferMatrix) -> np.ndarray:
    """Output power per input; 1 for lossless columns"""
    return M.column_power()


def insertion_loss(M: TransferMatrix) -> np.ndarray:
    """1 - transmission per input, for physically scaled matrices"""
    return 1.0 - column_transmission(M)


def splitting_ratios(M: TransferMatrix) -> np.ndarray:
    """Fraction of each input's output power reaching each output (columns sum to 1)"""
    power = np.abs(M.entries) ** 2
    totals = power.sum(axis=0, keepdims=True)
    if np.any(totals == 0):
        raise ParameterError("Splitting ratios undefined for an input with no transmission")
    return power / totals
