"""
Transfer matrix reconstruction from single-photon counts and two-photon
visibilities, with Poisson Monte Carlo error propagation.

Amplitudes come from single-photon count ratios. With the phases of row 1
and column 1 fixed to zero, each remaining phase follows from the visibility
of the 2x2 block {1,l} x {1,i}; the signs left open by the arccos are
chosen by an exhaustive search against all visibility records.
"""

import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from triphoton.core.config import settings
from triphoton.core.errors import (
    ConfigurationError,
    DataFormatError,
    InconsistentDataError,
    IndeterminatePhaseError,
    InstabilityError,
    MissingRecordsError,
    NumericalError,
    PairingError,
    ParameterError,
    SizeLimitError,
    UndefinedVisibilityError,
)
from triphoton.core.parallel import map_ordered
from triphoton.core.schemas import (
    PhaseSolution,
    PhotonConfiguration,
    SinglesCounts,
    TomographyResult,
    TransferMatrix,
    VisibilityRecord,
)
from triphoton.core.seeding import make_generator, spawn_generators
from triphoton.engine.distinguishability import visibility_two
from triphoton.engine.linear_optics import rate_distinguishable, rate_indistinguishable

logger = logging.getLogger(__name__)

MAX_SIGN_BITS = 16
COS_TOLERANCE = 1e-6

RecordKey = Tuple[int, int, int, int]


def amplitudes_from_singles(counts: SinglesCounts) -> np.ndarray:
    """sqrt(counts(l,i) / column_total(i)); squared columns sum to 1"""
    grid = counts.counts
    return np.sqrt(grid / grid.sum(axis=0, keepdims=True))


def _index_records(records: Iterable[VisibilityRecord]) -> Dict[RecordKey, VisibilityRecord]:
    indexed: Dict[RecordKey, VisibilityRecord] = {}
    for record in records:
        if record.key in indexed:
            raise PairingError(f"Duplicate visibility record for (i,j,l,m) = {record.key}")
        indexed[record.key] = record
    return indexed


def _batch_visibility(matrices: np.ndarray, key: RecordKey) -> np.ndarray:
    """Two-photon visibility of one combination for a stack of matrices"""
    i, j, l, m = (k - 1 for k in key)
    direct = matrices[:, l, i] * matrices[:, m, j]
    exchange = matrices[:, l, j] * matrices[:, m, i]
    c_inf = np.abs(direct) ** 2 + np.abs(exchange) ** 2
    c_zero = np.abs(direct + exchange) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(c_inf > 0, (c_inf - c_zero) / c_inf, np.nan)


def _circular_distance(phases: np.ndarray, reference: np.ndarray) -> float:
    return float(np.sum(np.angle(np.exp(1j * (phases - reference))) ** 2))


def phases_from_visibilities(
    amplitudes: np.ndarray,
    records: Iterable[VisibilityRecord],
    reference: Optional[np.ndarray] = None,
) -> PhaseSolution:
    """
    Phase grid (radians) in the gauge where row 1 and column 1 are real.
    Every input pair x output pair record must be present.

    cos(phi_li) = -V (a^2 d^2 + b^2 c^2) / (2 a b c d) with a = A11, b = A1i,
    c = Al1, d = Ali. Of the two sign patterns that explain the data equally
    well (M and its conjugate) the one closest to `reference` is kept, or
    else the one whose first nontrivial phase lies in [0, pi].
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    m, n = amplitudes.shape
    indexed = _index_records(records)
    for key in indexed:
        i, j, l, mm = key
        if j > n or mm > m:
            raise ConfigurationError(f"Record {key} outside a {m}x{n} matrix")

    if m < 2 or n < 2:
        return PhaseSolution(phases=np.zeros((m, n)), residual=0.0, signs=())

    required = [
        (i, j, l, k)
        for i, j in itertools.combinations(range(1, n + 1), 2)
        for l, k in itertools.combinations(range(1, m + 1), 2)
    ]
    missing = [key for key in required if key not in indexed]
    if missing:
        raise MissingRecordsError(missing)

    bits = (m - 1) * (n - 1)
    if bits > MAX_SIGN_BITS:
        raise SizeLimitError(f"Sign search over 2^{bits} patterns exceeds 2^{MAX_SIGN_BITS}")

    a = amplitudes[0, 0]
    magnitudes = np.zeros((m - 1, n - 1))
    for l in range(1, m):
        for i in range(1, n):
            b, c, d = amplitudes[0, i], amplitudes[l, 0], amplitudes[l, i]
            product = a * b * c * d
            if product <= 0:
                raise IndeterminatePhaseError(
                    f"Phase of element ({l + 1},{i + 1}) is indeterminate: a zero amplitude in its 2x2 block"
                )
            value = indexed[(1, i + 1, 1, l + 1)].value
            cosine = -value * (a * a * d * d + b * b * c * c) / (2.0 * product)
            if abs(cosine) > 1.0 + COS_TOLERANCE:
                raise InconsistentDataError(
                    f"Element ({l + 1},{i + 1}): visibility {value:.6f} implies cos(phi) = {cosine:.6f}"
                )
            if abs(cosine) > 1.0:
                logger.warning("Clamping cos(phi) = %.9f for element (%d,%d)", cosine, l + 1, i + 1)
            magnitudes[l - 1, i - 1] = np.arccos(np.clip(cosine, -1.0, 1.0))

    signs = np.array(list(itertools.product((1, -1), repeat=bits)), dtype=float)
    phases = np.zeros((signs.shape[0], m, n))
    phases[:, 1:, 1:] = (signs * magnitudes.ravel()).reshape(-1, m - 1, n - 1)
    matrices = amplitudes[None, :, :] * np.exp(1j * phases)

    residuals = np.zeros(signs.shape[0])
    for key, record in indexed.items():
        predicted = _batch_visibility(matrices, key)
        residuals += np.where(np.isnan(predicted), np.inf, (predicted - record.value) ** 2)

    best = int(np.argmin(residuals))
    partner = signs.shape[0] - 1 - best
    if residuals[partner] <= residuals[best] + 1e-12 * (1.0 + residuals[best]):
        if reference is not None:
            reference = np.asarray(reference, dtype=float)
            if _circular_distance(phases[partner], reference) < _circular_distance(phases[best], reference):
                best = partner
        else:
            flat = magnitudes.ravel()
            nontrivial = np.flatnonzero((flat > 1e-9) & (flat < np.pi - 1e-9))
            if nontrivial.size and signs[best, nontrivial[0]] < 0:
                best = partner

    logger.debug("Phase sign search: pattern %s, residual %.3e", signs[best].astype(int).tolist(), residuals[best])
    return PhaseSolution(
        phases=phases[best],
        residual=float(residuals[best]),
        signs=tuple(int(s) for s in signs[best]),
    )


def reconstruct(
    counts: SinglesCounts,
    records: Iterable[VisibilityRecord],
    reference: Optional[np.ndarray] = None,
) -> TomographyResult:
    """Matrix with unit-power columns in the row-1/column-1 real gauge; sigmas zero"""
    records = list(records)
    amplitudes = amplitudes_from_singles(counts)
    solution = phases_from_visibilities(amplitudes, records, reference=reference)
    matrix = TransferMatrix(entries=amplitudes * np.exp(1j * solution.phases))
    zeros = np.zeros(matrix.shape)
    return TomographyResult(
        matrix=matrix,
        amplitude_sigma=zeros,
        phase_sigma=zeros,
        resample_count=0,
        residual=solution.residual,
    )


def predict_visibilities(M: TransferMatrix) -> List[VisibilityRecord]:
    """Two-photon visibility for every input pair and output pair, sorted by (i,j,l,m)"""
    predicted = []
    for i, j in itertools.combinations(range(1, M.cols + 1), 2):
        input_config = PhotonConfiguration.from_modes((i, j))
        for l, m in itertools.combinations(range(1, M.rows + 1), 2):
            output_config = PhotonConfiguration.from_modes((l, m))
            c_inf = rate_distinguishable(M, input_config, output_config)
            c_zero = rate_indistinguishable(M, input_config, output_config)
            try:
                value = visibility_two(c_inf, c_zero)
            except UndefinedVisibilityError as exc:
                raise UndefinedVisibilityError(
                    f"Visibility undefined for inputs ({i},{j}), outputs ({l},{m}): zero distinguishable rate"
                ) from exc
            predicted.append(
                VisibilityRecord(inputs=(i, j), outputs=(l, m), value=float(np.clip(value, -1.0, 1.0)))
            )
    return predicted


def q_vis(measured: Iterable[VisibilityRecord], predicted: Iterable[VisibilityRecord]) -> float:
    """Mean absolute difference between paired visibilities"""
    measured_by_key = _index_records(measured)
    predicted_by_key = _index_records(predicted)
    if set(measured_by_key) != set(predicted_by_key):
        only_measured = sorted(set(measured_by_key) - set(predicted_by_key))
        only_predicted = sorted(set(predicted_by_key) - set(measured_by_key))
        raise PairingError(
            f"Record keys differ: measured only {only_measured}, predicted only {only_predicted}"
        )
    if not measured_by_key:
        raise PairingError("No visibility records to compare")
    differences = [
        abs(measured_by_key[key].value - predicted_by_key[key].value) for key in measured_by_key
    ]
    return float(np.mean(differences))


def _resample(
    counts: SinglesCounts,
    records: Sequence[VisibilityRecord],
    reference: np.ndarray,
    rng: np.random.Generator,
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    try:
        singles = SinglesCounts(counts=rng.poisson(counts.counts).astype(float))
        resampled = []
        for record in records:
            c_zero = float(rng.poisson(record.c0))
            c_inf = float(rng.poisson(record.cinf))
            resampled.append(
                VisibilityRecord(
                    inputs=record.inputs,
                    outputs=record.outputs,
                    value=float(np.clip(visibility_two(c_inf, c_zero), -1.0, 1.0)),
                    c0=c_zero,
                    cinf=c_inf,
                )
            )
        result = reconstruct(singles, resampled, reference=reference)
    except (NumericalError, ValidationError) as exc:
        logger.debug("Resample dropped: %s", exc)
        return None
    return result.matrix.magnitudes, result.matrix.phases


def monte_carlo(
    counts: SinglesCounts,
    records: Iterable[VisibilityRecord],
    resamples: Optional[int] = None,
    seed: Optional[int] = None,
) -> TomographyResult:
    """
    Parametric bootstrap: every observed count is replaced by a Poisson draw
    with that count as its mean, the matrix is reconstructed again, and the
    elementwise spread around the point estimate is reported. Phase
    deviations are wrapped to (-pi, pi] before taking the spread.
    """
    resamples = settings.RESAMPLES if resamples is None else int(resamples)
    if resamples < 2:
        raise ParameterError(f"Monte Carlo needs at least 2 resamples, got {resamples}")
    records = sorted(records, key=lambda r: r.key)
    lacking = [r.key for r in records if not r.has_raw_counts]
    if lacking:
        raise DataFormatError(f"Records without raw c0/cinf counts: {lacking}")

    point = reconstruct(counts, records)
    reference = point.matrix.phases
    generators = spawn_generators(seed, resamples)
    outcomes = map_ordered(lambda rng: _resample(counts, records, reference, rng), generators)

    kept = [outcome for outcome in outcomes if outcome is not None]
    failed = resamples - len(kept)
    if failed > settings.MAX_FAILURE_FRACTION * resamples or len(kept) < 2:
        raise InstabilityError(f"{failed} of {resamples} resampled reconstructions failed")
    if failed:
        logger.info("Dropped %d of %d resamples", failed, resamples)

    magnitudes = np.stack([outcome[0] for outcome in kept])
    deviations = np.angle(np.exp(1j * (np.stack([outcome[1] for outcome in kept]) - reference)))
    amplitude_sigma = magnitudes.std(axis=0, ddof=1)
    phase_sigma = deviations.std(axis=0, ddof=1)
    logger.info(
        "Monte Carlo over %d resamples: mean amplitude sigma %.4g, mean phase sigma %.4g rad",
        len(kept), amplitude_sigma.mean(), phase_sigma.mean(),
    )
    return TomographyResult(
        matrix=point.matrix,
        amplitude_sigma=amplitude_sigma,
        phase_sigma=phase_sigma,
        resample_count=len(kept),
        failed_resamples=failed,
        residual=point.residual,
    )


def synthesize_dataset(
    M: TransferMatrix,
    singles_level: Optional[float] = None,
    pair_level: Optional[float] = None,
    poisson: bool = False,
    seed: Optional[int] = None,
) -> Tuple[SinglesCounts, List[VisibilityRecord]]:
    """
    Forward model of a characterization run. Singles total `singles_level`
    per input; pair counts are scaled so the mean C(inf) equals `pair_level`.
    Without `poisson` the expected counts are returned unrounded.
    """
    singles_level = settings.SINGLES_COUNT_LEVEL if singles_level is None else singles_level
    pair_level = settings.PAIR_COUNT_LEVEL if pair_level is None else pair_level
    if singles_level <= 0 or pair_level <= 0:
        raise ParameterError("Count levels must be positive")
    rng = make_generator(seed) if poisson else None

    power = np.abs(M.entries) ** 2
    singles = singles_level * power / power.sum(axis=0, keepdims=True)
    if rng is not None:
        singles = rng.poisson(singles).astype(float)

    predicted = predict_visibilities(M)
    rates = []
    for record in predicted:
        input_config = PhotonConfiguration.from_modes(record.inputs)
        output_config = PhotonConfiguration.from_modes(record.outputs)
        rates.append((
            rate_distinguishable(M, input_config, output_config),
            rate_indistinguishable(M, input_config, output_config),
        ))
    scale = pair_level / np.mean([c_inf for c_inf, _ in rates])

    records = []
    for record, (c_inf, c_zero) in zip(predicted, rates):
        c_inf, c_zero = scale * c_inf, scale * c_zero
        value = record.value
        if rng is not None:
            c_inf, c_zero = float(rng.poisson(c_inf)), float(rng.poisson(c_zero))
            value = float(np.clip(visibility_two(c_inf, c_zero), -1.0, 1.0))
        records.append(
            VisibilityRecord(
                inputs=record.inputs,
                outputs=record.outputs,
                value=value,
                uncertainty=float(np.sqrt(c_zero) / c_inf) if c_inf > 0 else None,
                c0=c_zero,
                cinf=c_inf,
            )
        )
    return SinglesCounts(counts=singles), records


def gauge_invariant_phases(M: TransferMatrix) -> np.ndarray:
    """theta_11 + theta_li - theta_1i - theta_l1 for l, i >= 2, wrapped to (-pi, pi]"""
    theta = M.phases
    combos = theta[0, 0] + theta[1:, 1:] - theta[0:1, 1:] - theta[1:, 0:1]
    return np.angle(np.exp(1j * combos))


def compare_gauge_invariant(A: TransferMatrix, B: TransferMatrix) -> Tuple[float, float]:
    """
    Largest deviation of column-normalized magnitudes and of gauge-invariant
    phases between A and B, taking B or its conjugate, whichever is closer.
    """
    if A.shape != B.shape:
        raise ConfigurationError(f"Cannot compare {A.shape} with {B.shape} matrices")

    def normalized(M: TransferMatrix) -> np.ndarray:
        return M.magnitudes / np.linalg.norm(M.magnitudes, axis=0, keepdims=True)

    amplitude_error = float(np.max(np.abs(normalized(A) - normalized(B))))
    target = gauge_invariant_phases(A)
    phase_error = min(
        float(np.max(np.abs(np.angle(np.exp(1j * (target - candidate)))), initial=0.0))
        for candidate in (gauge_invariant_phases(B), -gauge_invariant_phases(B))
    )
    return amplitude_error, phase_error
