"""Tests for Gram-matrix partial distinguishability and delay scans."""

import itertools

import numpy as np
import pytest

from triphoton.core.errors import (
    ConfigurationError,
    GramValidationError,
    ParameterError,
    UndefinedVisibilityError,
    UnsupportedConfigurationError,
)
from triphoton.core.schemas import GramMatrix, PhotonConfiguration, TransferMatrix, WavepacketModel
from triphoton.engine.distinguishability import (
    gram_from_delays,
    hom_curve,
    limit_gram,
    rate_partial,
    sample_counts,
    scan_endpoints,
    threefold_curve,
    threefold_visibility,
    visibility_three,
    visibility_two,
)
from triphoton.engine.linear_optics import rate_distinguishable, rate_indistinguishable


def config(*modes):
    return PhotonConfiguration.from_modes(modes)


def brute_force_rate(M, inputs, outputs, gram):
    """Explicit double loop over permutations"""
    total = 0j
    p = len(inputs)
    for s in itertools.permutations(range(p)):
        for t in itertools.permutations(range(p)):
            term = 1 + 0j
            for k in range(p):
                term *= gram[s[k], t[k]]
                term *= M[outputs[k] - 1, inputs[s[k]] - 1]
                term *= np.conj(M[outputs[k] - 1, inputs[t[k]] - 1])
            total += term
    return total.real


def collision_free_patterns(n):
    for p in (2, 3):
        for inputs in itertools.combinations(range(1, n + 1), p):
            for outputs in itertools.combinations(range(1, n + 1), p):
                yield inputs, outputs


def test_gram_limits_reduce_to_pure_rates(rng):
    for _ in range(100):
        M = TransferMatrix(entries=rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        for inputs, outputs in collision_free_patterns(3):
            p = len(inputs)
            i_config, o_config = config(*inputs), config(*outputs)
            assert rate_partial(M, i_config, o_config, GramMatrix.identity(p)) == pytest.approx(
                rate_distinguishable(M, i_config, o_config), rel=1e-10, abs=1e-12
            )
            assert rate_partial(M, i_config, o_config, GramMatrix.ones(p)) == pytest.approx(
                rate_indistinguishable(M, i_config, o_config), rel=1e-10, abs=1e-12
            )


def test_partial_rate_matches_brute_force(rng):
    M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    gram = gram_from_delays(WavepacketModel(sigma_ps=1.0, center_delays=(0.0, 0.7, -1.1)), 3)
    expected = brute_force_rate(M, (1, 2, 3), (1, 2, 3), gram.entries)
    actual = rate_partial(TransferMatrix(entries=M), config(1, 2, 3), config(1, 2, 3), gram)
    assert actual == pytest.approx(expected, rel=1e-10)


def test_tritter_three_photon_visibility(tritter):
    assert threefold_visibility(tritter) == pytest.approx(-1 / 3, abs=1e-9)
    c_zero = brute_force_rate(tritter.entries, (1, 2, 3), (1, 2, 3), np.ones((3, 3)))
    c_inf = brute_force_rate(tritter.entries, (1, 2, 3), (1, 2, 3), np.eye(3))
    assert visibility_three(c_inf, c_zero) == pytest.approx(-1 / 3, abs=1e-9)


def test_tritter_single_delayed_photon(tritter):
    assert threefold_visibility(tritter, delayed_inputs=(1,)) == pytest.approx(-2 / 3, abs=1e-9)


def test_reference_device_three_photon_visibility(device):
    assert threefold_visibility(device, delayed_inputs=(1,)) == pytest.approx(-0.558, abs=0.02)
    assert threefold_visibility(device) == pytest.approx(-0.300, abs=0.02)


def test_gram_from_delays_overlaps():
    gram = gram_from_delays(WavepacketModel(sigma_ps=1.5, center_delays=(0.0, 3.0)), 2)
    assert gram.entries[0, 1].real == pytest.approx(np.exp(-1.0))
    far = gram_from_delays(WavepacketModel(sigma_ps=1.5, center_delays=(0.0, 100.0)), 2)
    assert far.entries[0, 1] == 0


def test_limit_gram_structure():
    gram = limit_gram(3, [0])
    np.testing.assert_array_equal(gram.entries.real, [[1, 0, 0], [0, 1, 1], [0, 1, 1]])
    with pytest.raises(ParameterError):
        limit_gram(3, [3])


def test_gram_validation():
    with pytest.raises(GramValidationError):
        GramMatrix(entries=[[1, 1, 0], [1, 1, 1], [0, 1, 1]])
    with pytest.raises(GramValidationError):
        GramMatrix(entries=[[1, 0.5], [0.2, 1]])
    with pytest.raises(GramValidationError):
        GramMatrix(entries=[[0.9, 0], [0, 1]])


def test_partial_rate_rejects_collisions_and_mismatched_order(tritter):
    with pytest.raises(UnsupportedConfigurationError):
        rate_partial(tritter, config(1, 1), config(1, 2), GramMatrix.ones(2))
    with pytest.raises(GramValidationError):
        rate_partial(tritter, config(1, 2), config(1, 2), GramMatrix.ones(3))


def test_hom_curve_balanced_splitter(splitter):
    delays = np.linspace(-9, 9, 25)
    scan = hom_curve(splitter, (1, 2), (1, 2), delays, sigma_ps=1.5)
    assert scan.kind == "hom"
    assert scan.delayed_input == 2
    assert scan.values[12] == pytest.approx(0.0, abs=1e-15)
    c_inf, c_zero = scan_endpoints(scan)
    assert c_inf == pytest.approx(0.5, abs=1e-7)
    assert visibility_two(c_inf, c_zero) == pytest.approx(1.0, abs=1e-9)


def test_hom_curve_is_symmetric_in_delay(device):
    delays = np.linspace(-6, 6, 13)
    scan = hom_curve(device, (1, 3), (2, 3), delays)
    np.testing.assert_allclose(scan.values, scan.values[::-1], rtol=1e-12)


def test_narrow_wavepackets_give_flat_curve(tritter):
    scan = threefold_curve(tritter, (1, 2, 3), (1, 2, 3), 1, np.arange(-3.0, 4.0), sigma_ps=1e-3)
    off_zero = np.delete(scan.values, 3)
    np.testing.assert_allclose(off_zero, 1 / 9, rtol=1e-12)
    assert scan.values[3] == pytest.approx(1 / 3)


def test_threefold_curve_validates_delayed_input(tritter):
    with pytest.raises(ConfigurationError):
        threefold_curve(tritter, (1, 2, 3), (1, 2, 3), 4, [0.0, 1.0])
    with pytest.raises(ConfigurationError):
        hom_curve(tritter, (1, 1), (1, 2), [0.0, 1.0])


def test_visibility_guards():
    with pytest.raises(UndefinedVisibilityError):
        visibility_two(0.0, 0.0)
    with pytest.raises(UndefinedVisibilityError):
        visibility_three(1.0, 0.0)
    assert visibility_two(2.0, 1.0) == pytest.approx(0.5)
    assert visibility_three(1.0, 2.0) == pytest.approx(-0.5)


def test_sample_counts_is_seeded(device):
    scan = hom_curve(device, (1, 2), (1, 2), np.linspace(-9, 9, 25))
    first = sample_counts(scan, 1000, seed=4)
    second = sample_counts(scan, 1000, seed=4)
    np.testing.assert_array_equal(first.values, second.values)
    np.testing.assert_array_equal(first.values, np.round(first.values))
    assert abs(first.values[0] - 1000) < 5 * np.sqrt(1000)
    with pytest.raises(ParameterError):
        sample_counts(scan, 0, seed=4)


def test_balanced_splitter_dip_rises_with_delay(splitter):
    delays = np.linspace(-9, 9, 25)
    values = hom_curve(splitter, (1, 2), (1, 2), delays, sigma_ps=1.5).values
    order = np.argsort(np.abs(delays), kind="stable")
    assert np.all(np.diff(values[order]) >= -1e-15)
    assert np.all(np.diff(values[12:]) >= -1e-15)
    assert np.all(np.diff(values[:13]) <= 1e-15)


def test_partial_rates_are_gauge_invariant(rng):
    M = TransferMatrix(entries=rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    rows = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    cols = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    rephased = TransferMatrix(entries=rows[:, None] * M.entries * cols[None, :])
    full = config(1, 2, 3)
    grams = [
        gram_from_delays(WavepacketModel(sigma_ps=1.0, center_delays=(0.0, 0.7, -1.1)), 3),
        gram_from_delays(WavepacketModel(sigma_ps=1.0, center_delays=(0.0, 0.0, 0.0)), 3),
        limit_gram(3, [0]),
        limit_gram(3, [0, 1, 2]),
    ]
    rates = [rate_partial(M, full, full, S) for S in grams]
    rephased_rates = [rate_partial(rephased, full, full, S) for S in grams]
    np.testing.assert_allclose(rephased_rates, rates, rtol=1e-10, atol=1e-12)
    assert visibility_three(rephased_rates[3], rephased_rates[1]) == pytest.approx(
        visibility_three(rates[3], rates[1]), abs=1e-12
    )
