"""
Partial distinguishability through a Gram matrix of wavepacket overlaps.

Coincidence rates interpolate between the identical-photon limit (all-ones
Gram matrix) and the classical limit (identity). Delay scans reproduce
two-photon dips and heralded three-photon curves.
"""

import itertools
import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from triphoton.core.config import settings
from triphoton.core.errors import (
    ConfigurationError,
    GramValidationError,
    ParameterError,
    SizeLimitError,
    UndefinedVisibilityError,
    UnsupportedConfigurationError,
)
from triphoton.core.parallel import map_ordered
from triphoton.core.schemas import (
    DelayScan,
    GramMatrix,
    PhotonConfiguration,
    TransferMatrix,
    WavepacketModel,
)
from triphoton.core.seeding import make_generator
from triphoton.engine.linear_optics import scattering_submatrix

logger = logging.getLogger(__name__)

MAX_PARTIAL_PHOTONS = 5


def gram_from_delays(model: WavepacketModel, photon_count: int) -> GramMatrix:
    """Gaussian wavepacket overlaps exp(-(d_j - d_k)^2 / (4 sigma^2))"""
    if photon_count != len(model.center_delays):
        raise ParameterError(
            f"Expected {photon_count} photon delays, got {len(model.center_delays)}"
        )
    delays = np.asarray(model.center_delays)
    overlaps = np.exp(-((delays[:, None] - delays[None, :]) ** 2) / (4.0 * model.sigma_ps ** 2))
    overlaps[overlaps < settings.GRAM_ZERO] = 0.0
    return GramMatrix(entries=overlaps)


def limit_gram(photon_count: int, delayed_positions: Iterable[int]) -> GramMatrix:
    """
    Exact large-delay Gram matrix: photons at the given 0-based positions are
    orthogonal to every other photon, the rest remain identical.
    """
    delayed = set(delayed_positions)
    if any(not 0 <= k < photon_count for k in delayed):
        raise ParameterError(f"Delayed positions {sorted(delayed)} outside 0..{photon_count - 1}")
    entries = np.ones((photon_count, photon_count))
    for k in delayed:
        entries[k, :] = 0.0
        entries[:, k] = 0.0
        entries[k, k] = 1.0
    return GramMatrix(entries=entries)


def rate_partial(
    M: TransferMatrix,
    input: PhotonConfiguration,
    output: PhotonConfiguration,
    S: GramMatrix,
) -> float:
    """
    sum over permutation pairs (s, t) of
    prod_k S[s(k), t(k)] M[d_k, i_s(k)] conj(M[d_k, i_t(k)]).
    Photon k is the k-th input mode in ascending order.
    """
    if not input.is_collision_free:
        raise UnsupportedConfigurationError(f"Input {input} has a multiply occupied mode")
    if not output.is_collision_free:
        raise UnsupportedConfigurationError(f"Output {output} has a multiply occupied mode")
    p = input.total_photons
    if p > MAX_PARTIAL_PHOTONS:
        raise SizeLimitError(f"Partial distinguishability limited to {MAX_PARTIAL_PHOTONS} photons, got {p}")
    if S.order != p:
        raise GramValidationError(f"Gram matrix of order {S.order} for {p} photons")

    # sub[k, j] = M[d_k, i_j]
    sub = scattering_submatrix(M, input, output)
    perms = np.array(list(itertools.permutations(range(p))))
    rows = np.arange(p)
    amplitudes = np.prod(sub[rows, perms], axis=1)
    weights = np.prod(S.entries[perms[:, None, :], perms[None, :, :]], axis=2)
    value = np.sum(weights * amplitudes[:, None] * np.conj(amplitudes)[None, :])

    scale = max(1.0, float(np.sum(np.abs(amplitudes)) ** 2))
    if abs(value.imag) > 1e-10 * scale:
        raise GramValidationError(
            f"Partial rate has imaginary part {value.imag:.3e}; Gram matrix inconsistent"
        )
    return float(max(value.real, 0.0))


def _curve(
    M: TransferMatrix,
    inputs: Tuple[int, ...],
    outputs: Tuple[int, ...],
    delayed_position: int,
    delays: Sequence[float],
    sigma_ps: float,
) -> np.ndarray:
    input_config = PhotonConfiguration.from_modes(inputs)
    output_config = PhotonConfiguration.from_modes(outputs)
    p = len(inputs)

    def sample(delay: float) -> float:
        centers = [0.0] * p
        centers[delayed_position] = float(delay)
        gram = gram_from_delays(WavepacketModel(sigma_ps=sigma_ps, center_delays=centers), p)
        return rate_partial(M, input_config, output_config, gram)

    return np.array(map_ordered(sample, list(delays)))


def _distinct(labels: Tuple[int, ...], what: str) -> Tuple[int, ...]:
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"{what} {labels} must be distinct")
    return tuple(sorted(labels))


def hom_curve(
    M: TransferMatrix,
    inputs: Tuple[int, int],
    outputs: Tuple[int, int],
    delays: Sequence[float],
    sigma_ps: Optional[float] = None,
) -> DelayScan:
    """Two-fold coincidence rate against the delay of the second photon"""
    sigma_ps = settings.SIGMA_PS if sigma_ps is None else sigma_ps
    inputs = _distinct(tuple(inputs), "Input pair")
    outputs = _distinct(tuple(outputs), "Output pair")
    values = _curve(M, inputs, outputs, 1, delays, sigma_ps)
    logger.debug("HOM curve %s -> %s over %d delays", inputs, outputs, len(values))
    return DelayScan(
        inputs=inputs,
        outputs=outputs,
        delays=delays,
        values=values,
        integration_time_s=settings.INTEGRATION_TIME_S,
        sigma_ps=sigma_ps,
        delayed_input=inputs[1],
        kind="hom",
    )


def threefold_curve(
    M: TransferMatrix,
    inputs: Tuple[int, int, int],
    outputs: Tuple[int, int, int],
    delayed_input: int,
    delays: Sequence[float],
    sigma_ps: Optional[float] = None,
) -> DelayScan:
    """Three-photon coincidence rate with only the photon in `delayed_input` displaced"""
    sigma_ps = settings.SIGMA_PS if sigma_ps is None else sigma_ps
    inputs = _distinct(tuple(inputs), "Inputs")
    outputs = _distinct(tuple(outputs), "Outputs")
    if delayed_input not in inputs:
        raise ConfigurationError(f"Delayed input {delayed_input} is not one of {inputs}")
    values = _curve(M, inputs, outputs, inputs.index(delayed_input), delays, sigma_ps)
    return DelayScan(
        inputs=inputs,
        outputs=outputs,
        delays=delays,
        values=values,
        integration_time_s=settings.INTEGRATION_TIME_S,
        sigma_ps=sigma_ps,
        delayed_input=delayed_input,
        kind="threefold",
    )


def visibility_two(c_inf: float, c_zero: float) -> float:
    """(C(inf) - C(0)) / C(inf); positive for dips"""
    if c_inf <= 0:
        raise UndefinedVisibilityError("Two-photon visibility undefined for C(inf) = 0")
    return float((c_inf - c_zero) / c_inf)


def visibility_three(c_inf: float, c_zero: float) -> float:
    """(C(inf) - C(0)) / C(0); negative for peaks"""
    if c_zero <= 0:
        raise UndefinedVisibilityError("Three-photon visibility undefined for C(0) = 0")
    return float((c_inf - c_zero) / c_zero)


def scan_endpoints(scan: DelayScan) -> Tuple[float, float]:
    """(C(inf), C(0)) read at the largest-|delay| sample and the sample nearest zero delay"""
    if scan.delays.size < 2:
        raise ParameterError("A scan needs at least two samples to read its endpoints")
    magnitudes = np.abs(scan.delays)
    return float(scan.values[np.argmax(magnitudes)]), float(scan.values[np.argmin(magnitudes)])


def threefold_visibility(
    M: TransferMatrix,
    inputs: Tuple[int, ...] = (1, 2, 3),
    outputs: Tuple[int, ...] = (1, 2, 3),
    delayed_inputs: Optional[Iterable[int]] = None,
) -> float:
    """
    Multiphoton visibility (C(inf) - C(0)) / C(0). C(inf) has every photon
    distinguishable when `delayed_inputs` is None, otherwise only the photons
    entering the listed inputs are delayed.
    """
    inputs = _distinct(tuple(inputs), "Inputs")
    input_config = PhotonConfiguration.from_modes(inputs)
    output_config = PhotonConfiguration.from_modes(_distinct(tuple(outputs), "Outputs"))
    p = len(inputs)
    if delayed_inputs is None:
        delayed = range(p)
    else:
        delayed_inputs = list(delayed_inputs)
        unknown = [i for i in delayed_inputs if i not in inputs]
        if unknown:
            raise ConfigurationError(f"Delayed inputs {unknown} are not among {inputs}")
        delayed = [inputs.index(i) for i in delayed_inputs]
    c_zero = rate_partial(M, input_config, output_config, GramMatrix.ones(p))
    c_inf = rate_partial(M, input_config, output_config, limit_gram(p, delayed))
    return visibility_three(c_inf, c_zero)


def sample_counts(scan: DelayScan, level: float, seed: Optional[int] = None) -> DelayScan:
    """Scale so the large-delay rate equals `level` counts and draw Poisson counts"""
    if level <= 0:
        raise ParameterError(f"Count level must be positive, got {level}")
    c_inf, _ = scan_endpoints(scan)
    if c_inf <= 0:
        raise UndefinedVisibilityError("Cannot scale a scan whose large-delay rate is zero")
    rng = make_generator(seed)
    counts = rng.poisson(level * scan.values / c_inf)
    return scan.with_values(counts.astype(float))
