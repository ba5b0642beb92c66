import numpy as np
import pytest

from vaarange import (
    DegenerateEntryError,
    DimensionMismatchError,
    PathSet,
    apply_lo_offsets,
    half_phase_sqrt,
    half_phases,
    recover_one_way,
    sample_lo_phases,
    synthesize_cfr,
    true_sign_matrix,
    two_way_cfr,
)
from conftest import random_geometry


def random_cfr(shape, rng):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestApplyLoOffsets:
    def test_zero_phases_identity(self):
        rng = np.random.default_rng(0)
        y = random_cfr((4, 5), rng)
        assert np.array_equal(apply_lo_offsets(y, np.zeros((4, 5)), "reflector"), y)

    def test_scalar_phase_addition(self):
        y = np.array([[2.0 * np.exp(1j * np.pi / 4)]])
        out = apply_lo_offsets(y, np.array([[0.7]]), "reflector")
        assert abs(out[0, 0] - 2.0 * np.exp(1j * (np.pi / 4 + 0.7))) < 1e-14

    def test_initiator_conjugates(self):
        y = np.array([[2.0 * np.exp(1j * np.pi / 4)]])
        out = apply_lo_offsets(y, np.array([[0.7]]), "initiator")
        assert abs(out[0, 0] - 2.0 * np.exp(1j * (np.pi / 4 - 0.7))) < 1e-14

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(1)
        y = random_cfr((3, 3), rng)
        phases = rng.uniform(0, 2 * np.pi, (3, 3))
        out = apply_lo_offsets(y, phases, "reflector")
        for i in range(3):
            for j in range(3):
                assert abs(out[i, j] - np.exp(1j * phases[i, j]) * y[i, j]) < 1e-14

    def test_errors(self):
        y = np.zeros((2, 2), dtype=complex)
        with pytest.raises(DimensionMismatchError):
            apply_lo_offsets(y, np.zeros((2, 3)), "reflector")
        with pytest.raises(ValueError):
            apply_lo_offsets(y, np.zeros((2, 2)), "sideways")


class TestTwoWayCfr:
    def test_offsets_cancel_single_path(self, radio_small, geometry_small):
        paths = PathSet([1.1], [140e-9], [1.0 + 0j])
        y = synthesize_cfr(geometry_small, radio_small, paths, 0.0, np.random.default_rng(0))
        phases = sample_lo_phases(radio_small.shape, np.random.default_rng(1))
        with_offsets = two_way_cfr(
            apply_lo_offsets(y, phases, "reflector"),
            apply_lo_offsets(y, phases, "initiator"),
        )
        without = two_way_cfr(y, y)
        rel = np.linalg.norm(with_offsets - without) / np.linalg.norm(without)
        assert rel < 1e-12

    def test_scalar_squaring(self):
        y = np.array([[2.0 * np.exp(1j * np.pi / 4)]])
        out = two_way_cfr(y, y)
        assert abs(out[0, 0] - 4.0 * np.exp(1j * np.pi / 2)) < 1e-14

    def test_phase_draw_invariance(self):
        rng = np.random.default_rng(2)
        y = random_cfr((6, 9), rng)
        outs = []
        for _ in range(2):
            phases = sample_lo_phases((6, 9), rng)
            outs.append(
                two_way_cfr(
                    apply_lo_offsets(y, phases, "reflector"),
                    apply_lo_offsets(y, phases, "initiator"),
                )
            )
        rel = np.linalg.norm(outs[0] - outs[1]) / np.linalg.norm(outs[0])
        assert rel < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            two_way_cfr(np.zeros((2, 2)), np.zeros((3, 2)))


class TestHalfPhaseSqrt:
    def test_principal_branch(self):
        y2 = np.array([[4.0 * np.exp(1j * np.pi / 2)]])
        out = half_phase_sqrt(y2)
        assert abs(out[0, 0] - 2.0 * np.exp(1j * np.pi / 4)) < 1e-14

    def test_branch_cut_edge(self):
        # phase exactly pi maps to half-angle pi/2, even for a -0.0 imaginary part
        assert abs(half_phase_sqrt(np.array([[-1.0 + 0.0j]]))[0, 0] - 1j) < 1e-15
        assert abs(half_phase_sqrt(np.array([[complex(-1.0, -0.0)]]))[0, 0] - 1j) < 1e-15

    def test_square_round_trip(self):
        rng = np.random.default_rng(3)
        y2 = random_cfr((8, 11), rng)
        out = half_phase_sqrt(y2)
        rel = np.abs(out**2 - y2) / np.abs(y2)
        assert rel.max() < 1e-12

    def test_half_phase_range(self):
        rng = np.random.default_rng(4)
        h = half_phases(random_cfr((20, 20), rng))
        assert (h > -np.pi / 2).all() and (h <= np.pi / 2).all()


class TestTrueSignMatrix:
    def test_no_branch_crossing_gives_all_plus(self):
        rng = np.random.default_rng(5)
        phases = rng.uniform(-np.pi / 2 + 0.01, np.pi / 2 - 0.01, (5, 7))
        y = rng.uniform(0.5, 2.0, (5, 7)) * np.exp(1j * phases)
        signs = true_sign_matrix(y, half_phase_sqrt(two_way_cfr(y, y)))
        assert (signs == 1).all()

    def test_scalar_normalization(self):
        y = np.array([[np.exp(1j * 3 * np.pi / 4)]])
        y_sqrt = half_phase_sqrt(two_way_cfr(y, y))
        # raw ratio has phase -pi (sign -1) but the sole entry normalizes to +1
        assert abs(y_sqrt[0, 0] - np.exp(-1j * np.pi / 4)) < 1e-14
        signs = true_sign_matrix(y, y_sqrt)
        assert signs[0, 0] == 1

    def test_reconstruction_oracle(self):
        rng = np.random.default_rng(6)
        y = random_cfr((10, 14), rng)
        y_sqrt = half_phase_sqrt(two_way_cfr(y, y))
        signs = true_sign_matrix(y, y_sqrt)
        assert set(np.unique(signs)) <= {-1, 1}
        assert signs[0, 0] == 1
        recon = y * signs
        err = np.abs(recon - y_sqrt) / np.abs(y_sqrt)
        assert err.max() < 1e-12 or np.abs(-recon - y_sqrt).max() / np.abs(y_sqrt).min() < 1e-12

    def test_degenerate_entry(self):
        y = np.ones((2, 2), dtype=complex)
        y[1, 0] = 1e-14
        with pytest.raises(DegenerateEntryError):
            true_sign_matrix(y, y)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            true_sign_matrix(np.ones((2, 2)), np.ones((2, 3)))


class TestEndToEnd:
    def test_noiseless_round_trip(self, radio_small):
        rng = np.random.default_rng(7)
        for _ in range(20):
            geom = random_geometry(radio_small, rng)
            num = int(rng.integers(1, 4))
            paths = PathSet(
                rng.uniform(0, np.pi, num),
                rng.uniform(0, 300e-9, num),
                rng.uniform(0.2, 1.0, num) * np.exp(1j * rng.uniform(0, 2 * np.pi, num)),
            )
            y = synthesize_cfr(geom, radio_small, paths, 0.0, rng)
            phases = sample_lo_phases(radio_small.shape, rng)
            y2 = two_way_cfr(
                apply_lo_offsets(y, phases, "reflector"),
                apply_lo_offsets(y, phases, "initiator"),
            )
            y_sqrt = half_phase_sqrt(y2)
            signs = true_sign_matrix(y, y_sqrt)
            recovered = recover_one_way(y_sqrt, signs)
            err = min(np.abs(recovered - y).max(), np.abs(recovered + y).max())
            assert err / np.abs(y).max() < 1e-12

    def test_lo_phases_uniform(self):
        phases = sample_lo_phases((200, 200), np.random.default_rng(8))
        assert phases.min() >= 0.0 and phases.max() < 2 * np.pi
        assert abs(phases.mean() - np.pi) < 0.05
