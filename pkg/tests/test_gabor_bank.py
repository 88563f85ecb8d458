import numpy as np
import pytest

from gabortrack.gabor_bank import (
    EnergyStream,
    GaborError,
    GaborParams,
    apply_bank,
    convolve_block,
    energy_map,
    make_bank,
    sample_pair,
)
from gabortrack.sequence_io import FrameGrid, STBlock

from oracles import direct_convolve_3d


@pytest.fixture(scope="module")
def default_bank():
    return make_bank()


@pytest.fixture(scope="module")
def small_bank():
    # 25x25 spatial extent shrunk to keep the direct oracle fast
    return make_bank(spatial_extent=9, temporal_extent=7)


class TestBankConstruction:
    def test_default_bank_geometry(self, default_bank):
        assert len(default_bank) == 9
        for pair in default_bank:
            assert pair.odd.shape == (25, 25, 7)
            assert pair.even.shape == (25, 25, 7)

    def test_origin_tap_is_normalization_constant(self, default_bank):
        for pair in default_bank:
            p = pair.params
            norm = 1.0 / ((2 * np.pi) ** 1.5 * p.sigma_x * p.sigma_y * p.sigma_t)
            assert pair.even[12, 12, 3] == pytest.approx(norm, rel=1e-12)
            assert pair.odd[12, 12, 3] == pytest.approx(0.0, abs=1e-18)

    def test_even_symmetric_odd_antisymmetric(self, default_bank):
        for pair in default_bank:
            flipped_even = np.flip(pair.even)
            flipped_odd = np.flip(pair.odd)
            np.testing.assert_allclose(flipped_even, pair.even, rtol=0, atol=1e-17)
            np.testing.assert_allclose(flipped_odd, -pair.odd, rtol=0, atol=1e-17)
            assert np.isfinite(pair.even).all() and np.isfinite(pair.odd).all()

    def test_dft_peak_at_center_frequency(self, default_bank):
        for pair in default_bank:
            spectrum = np.abs(np.fft.fftn(pair.even + 1j * pair.odd))
            peak = np.unravel_index(spectrum.argmax(), spectrum.shape)
            freqs_y = np.fft.fftfreq(pair.even.shape[0])
            freqs_x = np.fft.fftfreq(pair.even.shape[1])
            freqs_t = np.fft.fftfreq(pair.even.shape[2])
            expected = (
                np.abs(freqs_y - pair.params.omega_y0).argmin(),
                np.abs(freqs_x - pair.params.omega_x0).argmin(),
                np.abs(freqs_t - pair.params.omega_t0).argmin(),
            )
            assert peak == expected

    def test_even_extent_rejected(self):
        with pytest.raises(GaborError):
            GaborParams(omega=0.25, theta=0, omega_t0=0.125, spatial_extent=24)

    def test_nonpositive_sigma_rejected(self):
        with pytest.raises(GaborError):
            GaborParams(omega=0.25, theta=0, omega_t0=0.125, sigma_t=0.0)

    def test_empty_orientations_rejected(self):
        with pytest.raises(GaborError):
            make_bank(thetas=())

    def test_derived_center_frequencies(self):
        params = GaborParams(omega=0.25, theta=35.0, omega_t0=0.125)
        assert params.omega_x0 == pytest.approx(0.25 * np.cos(np.deg2rad(35)))
        assert params.omega_y0 == pytest.approx(0.25 * np.sin(np.deg2rad(35)))


class TestConvolveBlock:
    def test_zero_block_zero_response(self, small_bank):
        block = np.zeros((7, 9, 9))
        odd, even = convolve_block(block, small_bank[0])
        assert (odd == 0).all() and (even == 0).all()

    def test_constant_block_odd_response_vanishes(self, small_bank):
        for pair in small_bank:
            odd, _ = convolve_block(np.full((7, 9, 9), 17.0), pair)
            tap_sum = 17.0 * pair.odd.sum()
            assert abs(tap_sum) < 1e-9  # antisymmetry cancels the taps
            np.testing.assert_allclose(odd, tap_sum, atol=1e-9)

    def test_matches_direct_convolution_oracle(self, small_bank):
        rng = np.random.default_rng(42)
        block = rng.uniform(0, 255, size=(7, 9, 9))
        for pair in small_bank:
            odd, even = convolve_block(block, pair)
            odd_ref = direct_convolve_3d(block, pair.odd)
            even_ref = direct_convolve_3d(block, pair.even)
            scale = max(np.abs(odd_ref).max(), np.abs(even_ref).max())
            assert np.abs(odd - odd_ref).max() <= 1e-6 * scale
            assert np.abs(even - even_ref).max() <= 1e-6 * scale

    def test_temporal_length_mismatch(self, small_bank):
        with pytest.raises(GaborError, match="temporal"):
            convolve_block(np.zeros((6, 9, 9)), small_bank[0])


class TestEnergyMap:
    def test_three_four_five(self):
        odd = np.full((2, 2), 3.0)
        even = np.full((2, 2), 4.0)
        np.testing.assert_array_equal(energy_map(odd, even), np.full((2, 2), 25.0))

    def test_zero(self):
        z = np.zeros((3, 3))
        assert (energy_map(z, z) == 0).all()

    def test_shape_mismatch(self):
        with pytest.raises(GaborError):
            energy_map(np.zeros((2, 2)), np.zeros((3, 3)))


def _sinusoid_block(params, shape=(7, 64, 64), phase=0.0):
    n, height, width = shape
    rows, cols = np.mgrid[0:height, 0:width]
    return np.stack(
        [
            np.cos(
                2
                * np.pi
                * (params.omega_x0 * cols + params.omega_y0 * rows + params.omega_t0 * t)
                + phase
            )
            for t in range(n)
        ]
    )


class TestEnergyProperties:
    def test_matched_sinusoid_dominates_bank(self, default_bank):
        # a drifting grating at one filter's center frequencies must give
        # that filter the largest mean energy in the whole bank
        for i, probe in enumerate(default_bank):
            block = _sinusoid_block(probe.params, shape=(7, 64, 64))
            energies = []
            for pair in default_bank:
                odd, even = convolve_block(block, pair)
                energies.append(energy_map(odd, even).mean())
            assert int(np.argmax(energies)) == i

    def test_energy_phase_invariant(self, default_bank):
        pair = default_bank[4]
        means = []
        for phase in (0.0, 1.1, 2.9):
            block = _sinusoid_block(pair.params, shape=(7, 48, 48), phase=phase)
            odd, even = convolve_block(block, pair)
            means.append(energy_map(odd, even).mean())
        spread = (max(means) - min(means)) / max(means)
        assert spread <= 0.01

    def test_amplitude_doubling_quadruples_energy(self, small_bank):
        rng = np.random.default_rng(5)
        block = rng.uniform(-1, 1, size=(7, 12, 12))
        for pair in small_bank[:3]:
            odd1, even1 = convolve_block(block, pair)
            odd2, even2 = convolve_block(2.0 * block, pair)
            e1 = energy_map(odd1, even1)
            e2 = energy_map(odd2, even2)
            np.testing.assert_allclose(e2, 4.0 * e1, rtol=1e-9)


def _frame_sequence(rng, count, shape=(14, 18)):
    return [
        FrameGrid(index=i, pixels=rng.integers(0, 256, size=shape, dtype=np.uint8))
        for i in range(count)
    ]


class TestApplyBank:
    def test_zero_block_nine_zero_maps(self, small_bank):
        frames = tuple(
            FrameGrid(index=i, pixels=np.zeros((10, 10), dtype=np.uint8))
            for i in range(7)
        )
        stack = apply_bank(STBlock(frames=frames), small_bank)
        assert stack.maps.shape == (9, 10, 10)
        assert (stack.maps == 0).all()
        assert stack.frame_index == 6

    def test_deterministic_bit_identical(self, small_bank):
        rng = np.random.default_rng(11)
        frames = tuple(_frame_sequence(rng, 7))
        block = STBlock(frames=frames)
        first = apply_bank(block, small_bank)
        second = apply_bank(block, small_bank)
        assert (first.maps == second.maps).all()

    def test_fixed_filter_order(self, small_bank):
        thetas = [p.params.theta for p in small_bank]
        omega_ts = [p.params.omega_t0 for p in small_bank]
        assert thetas == [0.0] * 3 + [35.0] * 3 + [75.0] * 3
        assert omega_ts == [1 / 9, 1 / 8, 1 / 7] * 3

    def test_stream_matches_blockwise_path(self, small_bank):
        rng = np.random.default_rng(23)
        frames = _frame_sequence(rng, 10)
        stream = EnergyStream(small_bank)
        streamed = [s for s in (stream.push(f) for f in frames) if s is not None]
        assert [s.frame_index for s in streamed] == [6, 7, 8, 9]
        for stack in streamed:
            block = STBlock(frames=tuple(frames[stack.frame_index - 6 : stack.frame_index + 1]))
            reference = apply_bank(block, small_bank)
            assert (stack.maps == reference.maps).all()

    def test_energies_nonnegative(self, small_bank):
        rng = np.random.default_rng(31)
        block = STBlock(frames=tuple(_frame_sequence(rng, 7)))
        stack = apply_bank(block, small_bank)
        assert (stack.maps >= 0).all()
