import numpy as np
import pytest

from vaarange import (
    DimensionMismatchError,
    PathSet,
    RadioConfig,
    VaaGeometry,
    frequency_steering,
    perturb_geometry,
    snr_db_to_noise_std,
    spatial_steering,
    synthesize_cfr,
)
from conftest import random_geometry


def scalar_cfr_oracle(geometry, config, paths):
    """Element-wise reference: direct evaluation of the per-path exponent."""
    n, m = config.shape
    out = np.zeros((n, m), dtype=complex)
    for i in range(n):
        for j in range(m):
            for theta, tau, c in zip(paths.doas, paths.toas, paths.gains):
                phase = (
                    2 * np.pi * geometry.displacements[i] / geometry.wavelength
                    * np.cos(theta - geometry.directions[i])
                    - 2 * np.pi * j * config.subcarrier_spacing * tau
                )
                out[i, j] += c * np.exp(1j * phase)
    return out


class TestTypes:
    def test_radio_config_validation(self):
        with pytest.raises(ValueError):
            RadioConfig(num_positions=1)
        with pytest.raises(ValueError):
            RadioConfig(num_subcarriers=1)
        with pytest.raises(ValueError):
            RadioConfig(subcarrier_spacing=0.0)
        with pytest.raises(ValueError):
            RadioConfig(wavelength=-1.0)

    def test_geometry_reference_element(self):
        with pytest.raises(ValueError):
            VaaGeometry([0.1, 0.2], [0.0, 0.0], 0.125)
        with pytest.raises(ValueError):
            VaaGeometry([0.0, 0.05], [0.5, 0.0], 0.125)

    def test_geometry_nyquist(self):
        VaaGeometry([0.0, 0.0625], [0.0, 0.1], 0.125)  # exactly half wavelength is fine
        with pytest.raises(ValueError, match="Nyquist"):
            VaaGeometry([0.0, 0.07], [0.0, 0.1], 0.125)

    def test_pathset_validation(self):
        with pytest.raises(ValueError):
            PathSet([], [], [])
        with pytest.raises(ValueError):
            PathSet([0.5], [-1e-9], [1.0])
        with pytest.raises(ValueError):
            PathSet([np.pi], [1e-9], [1.0])  # DoA domain is [0, pi)
        with pytest.raises(ValueError):
            PathSet([0.5], [1e-9], [0.0])  # zero amplitude


class TestSpatialSteering:
    def test_broadside_is_all_ones(self, radio_small):
        # theta - phi_n = pi/2 for every element: the cosine vanishes
        geom = VaaGeometry(
            np.linspace(0, 0.05 * 5, 6), np.zeros(6), radio_small.wavelength
        )
        vec = spatial_steering(geom, radio_small, np.pi / 2)
        assert np.allclose(vec, 1.0, atol=1e-12)

    def test_half_wavelength_pair(self):
        radio = RadioConfig(num_positions=2, num_subcarriers=2, wavelength=0.125)
        geom = VaaGeometry([0.0, 0.125 / 2], [0.0, 0.0], 0.125)
        vec = spatial_steering(geom, radio, 0.0)
        assert np.allclose(vec, [1.0, -1.0], atol=1e-12)

    def test_scalar_oracle(self):
        radio = RadioConfig(num_positions=2, num_subcarriers=2, wavelength=0.125)
        geom = VaaGeometry([0.0, 0.04], [0.0, 0.3], 0.125)
        vec = spatial_steering(geom, radio, 1.0)
        expected = np.exp(1j * 2 * np.pi * 0.04 / 0.125 * np.cos(1.0 - 0.3))
        assert abs(vec[0] - 1.0) < 1e-12
        assert abs(vec[1] - expected) < 1e-12

    def test_unit_magnitude_property(self, radio_small):
        rng = np.random.default_rng(0)
        for _ in range(20):
            geom = random_geometry(radio_small, rng)
            vec = spatial_steering(geom, radio_small, rng.uniform(0, np.pi))
            assert np.max(np.abs(np.abs(vec) - 1.0)) < 1e-12

    def test_dimension_mismatch(self, radio_small):
        geom = VaaGeometry([0.0, 0.05], [0.0, 0.1], radio_small.wavelength)
        with pytest.raises(DimensionMismatchError):
            spatial_steering(geom, radio_small, 0.3)


class TestFrequencySteering:
    def test_zero_delay(self, radio_small):
        assert np.allclose(frequency_steering(radio_small, 0.0), 1.0, atol=1e-15)

    def test_half_cycle(self):
        radio = RadioConfig(num_positions=2, num_subcarriers=2, subcarrier_spacing=1e6)
        vec = frequency_steering(radio, 500e-9)
        assert np.allclose(vec, [1.0, -1.0], atol=1e-12)

    def test_scalar_oracle(self):
        radio = RadioConfig(num_positions=2, num_subcarriers=4, subcarrier_spacing=1e6)
        vec = frequency_steering(radio, 100e-9)
        for m in range(4):
            assert abs(vec[m] - np.exp(1j * 2 * np.pi * m * 0.1)) < 1e-12
        assert vec[0] == 1.0

    def test_negative_delay_rejected(self, radio_small):
        with pytest.raises(ValueError):
            frequency_steering(radio_small, -1e-9)


class TestSynthesizeCfr:
    def test_collapsed_array_single_path(self, radio_small):
        geom = VaaGeometry(np.zeros(6), np.zeros(6), radio_small.wavelength)
        paths = PathSet([0.7], [120e-9], [1.0 + 0j])
        y = synthesize_cfr(geom, radio_small, paths, 0.0, np.random.default_rng(0))
        expected_row = frequency_steering(radio_small, 120e-9).conj()
        for n in range(6):
            assert np.allclose(y[n], expected_row, atol=1e-12)

    def test_two_path_scalar_oracle(self):
        radio = RadioConfig(num_positions=2, num_subcarriers=2, wavelength=0.125)
        geom = VaaGeometry([0.0, 0.05], [0.0, -0.2], 0.125)
        paths = PathSet([0.4, 2.1], [80e-9, 150e-9], [1.0 + 0j, 0.5 * np.exp(0.9j)])
        y = synthesize_cfr(geom, radio, paths, 0.0, np.random.default_rng(0))
        oracle = scalar_cfr_oracle(geom, radio, paths)
        assert np.abs(y - oracle).max() < 1e-12

    def test_default_shape_matches_benchmark_dimensions(self, radio_full, geometry_full):
        paths = PathSet([1.0], [90e-9], [1.0 + 0j])
        y = synthesize_cfr(geometry_full, radio_full, paths, 0.1, np.random.default_rng(1))
        assert y.shape == (16, 80)

    def test_noiseless_rank_sum_property(self, radio_small):
        rng = np.random.default_rng(5)
        for _ in range(5):
            geom = random_geometry(radio_small, rng)
            num = rng.integers(1, 4)
            paths = PathSet(
                rng.uniform(0, np.pi, num),
                rng.uniform(0, 300e-9, num),
                rng.uniform(0.2, 1.0, num) * np.exp(1j * rng.uniform(0, 2 * np.pi, num)),
            )
            y = synthesize_cfr(geom, radio_small, paths, 0.0, rng)
            oracle = scalar_cfr_oracle(geom, radio_small, paths)
            rel = np.linalg.norm(y - oracle) / np.linalg.norm(oracle)
            assert rel < 1e-12

    def test_seeded_reproducibility(self, radio_small, geometry_small):
        paths = PathSet([0.9], [100e-9], [1.0 + 0j])
        y1 = synthesize_cfr(geometry_small, radio_small, paths, 0.3, np.random.default_rng(42))
        y2 = synthesize_cfr(geometry_small, radio_small, paths, 0.3, np.random.default_rng(42))
        assert np.array_equal(y1, y2)

    def test_noise_variance(self):
        radio = RadioConfig(num_positions=100, num_subcarriers=1000)
        geom = VaaGeometry(np.zeros(100), np.zeros(100), radio.wavelength)
        paths = PathSet([0.5], [0.0], [1.0 + 0j])
        sigma = 0.7
        y = synthesize_cfr(geom, radio, paths, sigma, np.random.default_rng(3))
        w = y - 1.0  # noiseless part is exactly 1 everywhere (tau = 0, d = 0)
        var = np.mean(np.abs(w) ** 2)
        assert abs(var - sigma**2) / sigma**2 < 0.02

    def test_rejects_non_finite(self, radio_small, geometry_small):
        paths = PathSet([0.9], [100e-9], [1.0 + 0j])
        with pytest.raises(ValueError):
            synthesize_cfr(geometry_small, radio_small, paths, np.nan, np.random.default_rng(0))


def test_perturb_geometry_defaults_to_exact(geometry_small):
    assert perturb_geometry(geometry_small) is geometry_small


def test_perturb_geometry_keeps_reference(geometry_small):
    rng = np.random.default_rng(9)
    noisy = perturb_geometry(geometry_small, displacement_std=1e-4, direction_std=1e-3, rng=rng)
    assert noisy.displacements[0] == 0.0 and noisy.directions[0] == 0.0
    assert not np.array_equal(noisy.displacements, geometry_small.displacements)


def test_snr_conversion():
    assert snr_db_to_noise_std(0.0) == 1.0
    assert abs(snr_db_to_noise_std(20.0) - 0.1) < 1e-15
