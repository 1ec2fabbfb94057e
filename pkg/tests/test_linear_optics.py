"""Tests for permanents and indistinguishable/distinguishable rates."""

import itertools

import numpy as np
import pytest
from scipy.stats import unitary_group

from triphoton.core.errors import ConfigurationError, DimensionError, ParameterError, SizeLimitError
from triphoton.core.schemas import ComplexAmplitude, PhotonConfiguration, TransferMatrix
from triphoton.engine.linear_optics import (
    output_distribution,
    permanent,
    permanent_naive,
    permanent_ryser,
    random_unitary,
    rate_distinguishable,
    rate_indistinguishable,
    scattering_submatrix,
)


def config(*modes):
    return PhotonConfiguration.from_modes(modes)


def test_permanent_small_values():
    assert permanent_naive([[1, 2], [3, 4]]) == pytest.approx(10)
    assert permanent_ryser([[1, 2], [3, 4]]) == pytest.approx(10)
    assert permanent_naive([[5]]) == pytest.approx(5)
    assert permanent(np.ones((4, 4))) == pytest.approx(24)


def test_ryser_matches_permutation_sum(rng):
    for trial in range(500):
        k = 2 + trial % 7
        matrix = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        expected = permanent_naive(matrix)
        scale = permanent_naive(np.abs(matrix)).real
        assert abs(permanent_ryser(matrix) - expected) <= 1e-10 * scale


def test_ideal_tritter_permanent(tritter):
    assert permanent(tritter.entries) == pytest.approx(-1 / np.sqrt(3), abs=1e-12)


def test_permanent_guards():
    with pytest.raises(DimensionError):
        permanent(np.ones((2, 3)))
    with pytest.raises(SizeLimitError):
        permanent_naive(np.ones((9, 9)))
    with pytest.raises(SizeLimitError):
        permanent_ryser(np.ones((31, 31)))


def test_balanced_splitter_rates(splitter):
    assert rate_indistinguishable(splitter, config(1, 2), config(1, 2)) == pytest.approx(0, abs=1e-15)
    assert rate_indistinguishable(splitter, config(1, 2), config(1, 1)) == pytest.approx(0.5)
    assert rate_distinguishable(splitter, config(1, 2), config(1, 2)) == pytest.approx(0.5)


def test_tritter_three_photon_rates(tritter):
    full = config(1, 2, 3)
    assert rate_indistinguishable(tritter, full, full) == pytest.approx(1 / 3, abs=1e-12)
    assert rate_distinguishable(tritter, full, full) == pytest.approx(2 / 9, abs=1e-12)


def test_output_distribution_sums_to_one_for_unitaries():
    M = TransferMatrix(entries=unitary_group.rvs(4, random_state=7))
    distribution = output_distribution(M, config(1, 2, 3))
    assert sum(distribution.values()) == pytest.approx(1.0, abs=1e-10)
    keys = [tuple(k.modes) for k in distribution]
    assert keys == sorted(keys)

    bunching = output_distribution(M, config(1, 1))
    assert sum(bunching.values()) == pytest.approx(1.0, abs=1e-10)


def test_collision_free_distribution_skips_bunched_outputs(tritter):
    distribution = output_distribution(tritter, config(1, 2), collision_free_only=True)
    assert len(distribution) == 3
    assert all(key.is_collision_free for key in distribution)


def test_distinguishable_rate_is_classical_sum():
    M = TransferMatrix(entries=unitary_group.rvs(3, random_state=11))
    power = np.abs(M.entries) ** 2
    for inputs in itertools.combinations(range(1, 4), 2):
        for outputs in itertools.combinations(range(1, 4), 2):
            (i, j), (l, m) = inputs, outputs
            expected = power[l - 1, i - 1] * power[m - 1, j - 1] + power[l - 1, j - 1] * power[m - 1, i - 1]
            assert rate_distinguishable(M, config(*inputs), config(*outputs)) == pytest.approx(expected)


def test_scattering_submatrix_repeats_occupied_modes(tritter):
    sub = scattering_submatrix(tritter, config(1, 1), config(2, 3))
    np.testing.assert_allclose(sub[:, 0], sub[:, 1])
    np.testing.assert_allclose(sub[:, 0], tritter.entries[1:, 0])


def test_configuration_errors(tritter):
    with pytest.raises(ConfigurationError):
        rate_indistinguishable(tritter, config(1, 2), config(1, 2, 3))
    with pytest.raises(ConfigurationError):
        rate_indistinguishable(tritter, config(1, 4), config(1, 2))
    with pytest.raises(ConfigurationError):
        PhotonConfiguration(mode_occupations=((1, 1), (1, 2)))


def test_rates_invariant_under_row_and_column_phases(rng):
    M = random_unitary(3, seed=5)
    rows = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    cols = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    rephased = TransferMatrix(entries=rows[:, None] * M.entries * cols[None, :])
    full = config(1, 2, 3)
    assert rate_indistinguishable(rephased, full, full) == pytest.approx(
        rate_indistinguishable(M, full, full), abs=1e-12
    )


def test_random_unitary_is_seeded_and_unitary():
    first = random_unitary(5, seed=3)
    second = random_unitary(5, seed=3)
    np.testing.assert_array_equal(first.entries, second.entries)
    np.testing.assert_allclose(first.entries.conj().T @ first.entries, np.eye(5), atol=1e-12)


def test_complex_amplitude_polar_form(tritter):
    element = tritter.amplitude(2, 2)
    assert element.magnitude == pytest.approx(1 / np.sqrt(3))
    assert element.phase == pytest.approx(2 * np.pi / 3)
    rebuilt = ComplexAmplitude.from_polar(*element.polar)
    assert rebuilt.value == pytest.approx(element.value)
    with pytest.raises(ConfigurationError):
        tritter.amplitude(4, 1)
    with pytest.raises(ParameterError):
        ComplexAmplitude.from_polar(-1.0, 0.0)


def test_transfer_matrix_from_polar_uses_pi_units():
    M = TransferMatrix.from_polar([[1.0, 1.0]], [[0.0, 0.5]], scale=2.0)
    np.testing.assert_allclose(M.entries, [[2.0, 2.0j]], atol=1e-15)
    with pytest.raises(DimensionError):
        TransferMatrix.from_polar([[1.0]], [[0.0, 0.5]])


def test_rates_scale_with_row_factors():
    M = random_unitary(3, seed=12)
    factors = np.array([0.7, 1.3, 1.0])
    scaled = TransferMatrix(entries=factors[:, None] * M.entries)
    full, bunched = config(1, 2, 3), config(1, 1, 2)
    expected = 0.7 ** 4 * 1.3 ** 2
    assert rate_indistinguishable(scaled, full, bunched) == pytest.approx(
        expected * rate_indistinguishable(M, full, bunched), rel=1e-10
    )
    assert rate_distinguishable(scaled, full, bunched) == pytest.approx(
        expected * rate_distinguishable(M, full, bunched), rel=1e-10
    )


def test_permanent_is_linear_in_each_column(rng):
    matrix = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    s = 0.3 - 1.2j
    for column in range(4):
        scaled = matrix.copy()
        scaled[:, column] *= s
        assert permanent_ryser(scaled) == pytest.approx(s * permanent_ryser(matrix), rel=1e-10)
        assert permanent_naive(scaled) == pytest.approx(s * permanent_naive(matrix), rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_haar_unitaries_give_normalized_distributions(n):
    M = random_unitary(n, seed=100 + n)
    np.testing.assert_allclose(M.entries.conj().T @ M.entries, np.eye(n), atol=1e-12)
    photons = config(*range(1, min(n, 3) + 1))
    assert sum(output_distribution(M, photons).values()) == pytest.approx(1.0, abs=1e-10)
