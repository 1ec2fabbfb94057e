"""
Permanent-based photon statistics through an arbitrary transfer matrix.

Rates are exact transition probabilities when the matrix is unitary and
relative rates otherwise; visibilities built from them are ratios and stay
well defined for lossy devices.
"""

import itertools
import logging
import math
from typing import Any, Dict, Optional

import numpy as np
from scipy.stats import unitary_group

from triphoton.core.config import settings
from triphoton.core.errors import ConfigurationError, DimensionError, SizeLimitError
from triphoton.core.schemas import PhotonConfiguration, TransferMatrix
from triphoton.core.seeding import make_generator

logger = logging.getLogger(__name__)

_RYSER_CHUNK = 1 << 15


def _as_square(matrix: Any) -> np.ndarray:
    array = np.asarray(matrix, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimensionError(f"Permanent needs a square matrix, got shape {array.shape}")
    return array


def permanent_naive(matrix: Any) -> complex:
    """Sum over all permutations of the products M[i, s(i)]"""
    array = _as_square(matrix)
    k = array.shape[0]
    if k > settings.NAIVE_PERMANENT_LIMIT:
        raise SizeLimitError(
            f"Permutation-sum permanent limited to order {settings.NAIVE_PERMANENT_LIMIT}, got {k}"
        )
    if k == 0:
        return 1 + 0j
    perms = np.array(list(itertools.permutations(range(k))))
    return complex(np.prod(array[np.arange(k), perms], axis=1).sum())


def permanent_ryser(matrix: Any) -> complex:
    """
    Ryser inclusion-exclusion formula,
    perm(A) = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} a_ij,
    evaluated over column subsets in vectorized chunks.
    """
    array = _as_square(matrix)
    k = array.shape[0]
    if k > settings.RYSER_PERMANENT_LIMIT:
        raise SizeLimitError(
            f"Ryser permanent limited to order {settings.RYSER_PERMANENT_LIMIT}, got {k}"
        )
    if k == 0:
        return 1 + 0j

    shifts = np.arange(k)
    total = 0j
    for start in range(1, 1 << k, _RYSER_CHUNK):
        subsets = np.arange(start, min(start + _RYSER_CHUNK, 1 << k))
        bits = ((subsets[:, None] >> shifts) & 1).astype(float)
        row_sums = bits @ array.T
        signs = 1.0 - 2.0 * (bits.sum(axis=1) % 2)
        total += np.sum(signs * np.prod(row_sums, axis=1))
    return complex((-1) ** k * total)


def permanent(matrix: Any) -> complex:
    """Permutation sum for tiny matrices, Ryser otherwise"""
    array = _as_square(matrix)
    if array.shape[0] <= 3:
        return permanent_naive(array)
    return permanent_ryser(array)


def _check_pair(M: TransferMatrix, input: PhotonConfiguration, output: PhotonConfiguration) -> None:
    if input.total_photons != output.total_photons:
        raise ConfigurationError(
            f"Input {input} carries {input.total_photons} photons but output {output} "
            f"carries {output.total_photons}"
        )
    input.check_range(M.cols, side="input mode")
    output.check_range(M.rows, side="output mode")


def scattering_submatrix(
    M: TransferMatrix,
    input: PhotonConfiguration,
    output: PhotonConfiguration,
) -> np.ndarray:
    """p x p matrix repeating column i per photon in input i and row l per photon in output l"""
    _check_pair(M, input, output)
    rows = [l - 1 for l in output.modes]
    cols = [i - 1 for i in input.modes]
    return np.array(M.entries[np.ix_(rows, cols)])


def _occupation_factorial(configuration: PhotonConfiguration) -> int:
    return math.prod(math.factorial(o) for o in configuration.occupations)


def _check_photon_limit(p: int) -> None:
    if p > settings.NAIVE_PERMANENT_LIMIT:
        raise SizeLimitError(
            f"Rates limited to {settings.NAIVE_PERMANENT_LIMIT} photons, got {p}"
        )


def rate_indistinguishable(
    M: TransferMatrix,
    input: PhotonConfiguration,
    output: PhotonConfiguration,
) -> float:
    """|perm(M_sub)|^2 / (prod s_i! prod t_l!)"""
    _check_photon_limit(input.total_photons)
    sub = scattering_submatrix(M, input, output)
    amplitude = permanent(sub)
    norm = _occupation_factorial(input) * _occupation_factorial(output)
    return float(abs(amplitude) ** 2 / norm)


def rate_distinguishable(
    M: TransferMatrix,
    input: PhotonConfiguration,
    output: PhotonConfiguration,
) -> float:
    """perm(|M_sub|^2) / prod t_l!, the classical transition probability"""
    _check_photon_limit(input.total_photons)
    sub = scattering_submatrix(M, input, output)
    value = permanent(np.abs(sub) ** 2).real
    return float(value / _occupation_factorial(output))


def output_distribution(
    M: TransferMatrix,
    input: PhotonConfiguration,
    collision_free_only: bool = False,
) -> Dict[PhotonConfiguration, float]:
    """Indistinguishable rates of every detection pattern, keys in lexicographic order"""
    p = input.total_photons
    if p > 5 or M.rows > 8:
        raise SizeLimitError(
            f"Output enumeration limited to 5 photons over 8 modes, got {p} over {M.rows}"
        )
    input.check_range(M.cols, side="input mode")
    modes = range(1, M.rows + 1)
    patterns = (
        itertools.combinations(modes, p)
        if collision_free_only
        else itertools.combinations_with_replacement(modes, p)
    )
    distribution = {}
    for pattern in patterns:
        output = PhotonConfiguration.from_modes(pattern)
        distribution[output] = rate_indistinguishable(M, input, output)
    logger.debug("Enumerated %d output patterns for input %s", len(distribution), input)
    return distribution


def random_unitary(n: int, seed: Optional[int] = None) -> TransferMatrix:
    """Haar-random n x n unitary"""
    if n == 1:
        phase = make_generator(seed).uniform(0, 2 * np.pi)
        return TransferMatrix(entries=[[np.exp(1j * phase)]])
    return TransferMatrix(entries=unitary_group.rvs(n, random_state=make_generator(seed)))
