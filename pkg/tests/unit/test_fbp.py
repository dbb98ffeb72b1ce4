import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import DimensionMismatchError
from src.reconstruction.fbp import (
    FilterBank, FilterParams, backproject, butterworth_gain, fbp_reconstruct, fbp_sweep,
    filter_projection, filter_sinogram, padded_length, ramlak_kernel, ramp_response
)
from src.scanmodel.phantom import BaseDisk, Phantom, rasterize_phantom
from src.scanmodel.noise import counts_to_sinogram, simulate_counts
from src.scanmodel.projector import radon_forward
from src.scanmodel.types import ScanGeometry, Sinogram


class TestButterworth:
    @pytest.mark.parametrize("order", [1, 3])
    def test_half_power_at_cutoff(self, order):
        params = FilterParams(cutoff=0.8, order=order)
        assert butterworth_gain(0.0, params) == 1.0
        assert butterworth_gain(0.8, params) == pytest.approx(2 ** -0.5)

    def test_higher_order_is_steeper(self):
        omega = np.array([1.0])
        assert butterworth_gain(omega, FilterParams(cutoff=0.4, order=3))[0] < \
            butterworth_gain(omega, FilterParams(cutoff=0.4, order=1))[0]

    def test_infinite_cutoff_is_transparent(self):
        gain = butterworth_gain(np.linspace(0, 1, 11), FilterParams(cutoff=np.inf))
        np.testing.assert_array_equal(gain, 1.0)


class TestRamp:
    def test_padding(self):
        assert padded_length(367) == 1024
        assert padded_length(512) == 1024
        assert padded_length(1) == 2

    @pytest.mark.parametrize("bin_spacing", [1.0, 0.1])
    def test_response_is_abs_frequency(self, bin_spacing):
        n_pad = 1024
        response = ramp_response(n_pad, bin_spacing)
        nu = (n_pad // 4) / (n_pad * bin_spacing)
        assert response[n_pad // 4] == pytest.approx(nu, rel=0.01)
        assert abs(response[0]) < 1e-3 / bin_spacing

    def test_kernel_is_even(self):
        kernel = ramlak_kernel(64, 1.0)
        np.testing.assert_allclose(kernel[1:], kernel[1:][::-1])
        assert kernel[2] == 0.0

    def test_unwindowed_filter_is_linear_convolution(self, rng):
        num_bins, spacing = 37, 0.5
        view = rng.standard_normal(num_bins)
        lags = np.arange(-(num_bins - 1), num_bins)
        kernel = ramlak_kernel(padded_length(num_bins), spacing)[np.abs(lags)]
        expected = spacing * np.convolve(view, kernel)[num_bins - 1:2 * num_bins - 1]
        filtered = filter_projection(view, FilterParams(cutoff=np.inf), spacing)
        np.testing.assert_allclose(filtered, expected, atol=1e-10)

    def test_dc_term_below_one_frequency_step(self):
        for n_pad, spacing in [(64, 1.0), (1024, 1.0), (1024, 0.1)]:
            dc = ramp_response(n_pad, spacing)[0]
            assert 0.0 < dc < 1.0 / (n_pad * spacing)

    def test_constant_view_vanishes_inside(self):
        filtered = filter_projection(np.full(201, 3.0), FilterParams(cutoff=np.inf))
        assert np.abs(filtered[80:121]).max() < 2e-3 * 3.0
        # the edge bin keeps about c/8
        assert filtered[0] == pytest.approx(3.0 / 8, rel=0.02)

    @pytest.mark.parametrize("params", [FilterParams(cutoff=np.inf), FilterParams(cutoff=0.4, order=3)])
    def test_white_noise_transfer(self, params):
        num_bins, realizations = 512, 100
        geometry = ScanGeometry(num_views=realizations, num_bins=num_bins, bin_spacing=1.0, blank_count=1.0)
        noise = np.random.default_rng(7).standard_normal(geometry.shape)
        filtered = filter_sinogram(Sinogram(geometry, noise), params).data
        taper = np.hanning(num_bins)
        x = np.fft.rfft(noise * taper, axis=1)
        y = np.fft.rfft(filtered * taper, axis=1)
        for omega in (0.25, 0.5, 0.75):
            k = int(omega * num_bins / 2)
            measured = np.real(np.sum(y[:, k] * np.conj(x[:, k]))) / np.sum(np.abs(x[:, k]) ** 2)
            expected = omega / 2 * butterworth_gain(omega, params)
            assert measured == pytest.approx(expected, rel=0.02)

    def test_views_filtered_independently(self, rng):
        geometry = ScanGeometry(num_views=12, num_bins=41, bin_spacing=0.5, blank_count=1.0)
        data = rng.standard_normal(geometry.shape)
        order = rng.permutation(12)
        params = FilterParams(cutoff=0.8, order=1)
        straight = filter_sinogram(Sinogram(geometry, data), params).data
        shuffled = filter_sinogram(Sinogram(geometry, data[order]), params).data
        np.testing.assert_allclose(shuffled, straight[order], rtol=0, atol=1e-12)

    def test_view_must_be_1d(self):
        with pytest.raises(DimensionMismatchError):
            filter_projection(np.zeros((2, 3)), FilterParams(cutoff=1.0))


class TestReconstruction:
    @pytest.fixture
    def disk_sino(self):
        image = rasterize_phantom(Phantom(base_disk=BaseDisk(radius=20.0, value=1.0)), 64, 64, 1.0)
        geometry = ScanGeometry.covering(64, 1.0, 180, 1.0)
        return radon_forward(image, geometry)

    def test_disk_interior_recovered(self, disk_sino):
        image = fbp_reconstruct(disk_sino, FilterParams(cutoff=np.inf), 64, 64, 1.0)
        x, y = image.pixel_coordinates()
        r = np.hypot(*np.meshgrid(x, y))
        assert image.data[r < 12].mean() == pytest.approx(1.0, rel=0.02)
        assert np.abs(image.data[r > 26]).mean() < 0.05

    def test_low_pass_reduces_noise(self, disk_sino, rng):
        noisy = disk_sino.with_data(disk_sino.data + 0.5 * rng.standard_normal(disk_sino.data.shape))
        sharp = fbp_reconstruct(noisy, FilterParams(cutoff=np.inf), 64, 64, 1.0)
        smooth = fbp_reconstruct(noisy, FilterParams(cutoff=0.4, order=3), 64, 64, 1.0)
        x, y = sharp.pixel_coordinates()
        inner = np.hypot(*np.meshgrid(x, y)) < 12
        assert smooth.data[inner].std() < sharp.data[inner].std()

    def test_sweep_matches_single_reconstructions(self, disk_sino):
        bank = FilterBank.from_cutoffs([0.4, 1.15, np.inf])
        images = fbp_sweep(disk_sino, bank, 64, 64, 1.0)
        assert [im.extra["filter"] for im in images] == ["fbp_c0.4_p3", "fbp_c1.15_p3", "fbp_cinf_p3"]
        for params, image in zip(bank, images):
            np.testing.assert_allclose(image.data, fbp_reconstruct(disk_sino, params, 64, 64, 1.0).data,
                                       atol=1e-12)

    def test_backproject_grid_checked(self, disk_sino):
        with pytest.raises(DimensionMismatchError):
            backproject(disk_sino, 0, 64, 1.0)

    def test_backprojected_ones_equal_pi(self):
        geometry = ScanGeometry.covering(24, 0.5, 36, 1.0)
        image = backproject(Sinogram(geometry, np.ones(geometry.shape)), 24, 24, 0.5)
        np.testing.assert_allclose(image.data, np.pi, rtol=1e-12)

    @pytest.mark.parametrize("view, bin_index", [(0, 20), (7, 15), (13, 26)])
    def test_bin_impulse_backprojects_to_line(self, view, bin_index):
        geometry = ScanGeometry.covering(24, 0.5, 20, 1.0)
        data = np.zeros(geometry.shape)
        data[view, bin_index] = 1.0
        image = backproject(Sinogram(geometry, data), 24, 24, 0.5)
        x, y = image.pixel_coordinates()
        X, Y = np.meshgrid(x, y)
        theta = geometry.angles[view]
        offset = np.abs(X * np.cos(theta) + Y * np.sin(theta) - geometry.bin_positions[bin_index])
        expected = np.pi / geometry.num_views * np.clip(1.0 - offset / geometry.bin_spacing, 0.0, None)
        np.testing.assert_allclose(image.data, expected, atol=1e-12)

    def test_first_view_line_is_constant_along_ray(self):
        geometry = ScanGeometry.covering(24, 0.5, 20, 1.0)
        data = np.zeros(geometry.shape)
        data[0, geometry.num_bins // 2] = 1.0
        image = backproject(Sinogram(geometry, data), 24, 24, 0.5).data
        # view 0 integrates along y, so every column is constant
        np.testing.assert_allclose(image, image[:1, :].repeat(24, axis=0), atol=1e-15)
        assert image.max() > 0

    def test_fbp_is_linear(self, disk_sino, rng):
        other = disk_sino.with_data(rng.standard_normal(disk_sino.data.shape))
        params = FilterParams(cutoff=0.8, order=3)
        combined = fbp_reconstruct(disk_sino.with_data(disk_sino.data + other.data), params, 64, 64, 1.0).data
        separate = (fbp_reconstruct(disk_sino, params, 64, 64, 1.0).data
                    + fbp_reconstruct(other, params, 64, 64, 1.0).data)
        assert np.abs(combined - separate).max() <= 1e-10 * np.abs(separate).max()

    def test_noise_variance_falls_with_cutoff(self):
        image = rasterize_phantom(Phantom(base_disk=BaseDisk(radius=1.0, value=0.2)), 32, 32, 0.1)
        geometry = ScanGeometry.covering(32, 0.1, 60, 1e4)
        sino = radon_forward(image, geometry)
        bank = FilterBank.from_cutoffs([np.inf, 1.15, 0.8, 0.4])
        clean = fbp_sweep(sino, bank, 32, 32, 0.1)
        variance = np.zeros(len(bank))
        for seed in range(20):
            noisy = fbp_sweep(counts_to_sinogram(simulate_counts(sino, seed)), bank, 32, 32, 0.1)
            variance += [np.mean((n.data - c.data) ** 2) for n, c in zip(noisy, clean)]
        assert all(later < earlier for earlier, later in zip(variance, variance[1:]))


class TestFilterBank:
    def test_default_and_sweep(self):
        assert [f.cutoff for f in FilterBank.default()] == [0.4, 1.15, np.inf]
        sweep = FilterBank.sweep_bank()
        assert len(sweep) == 8
        assert sum(f.order == 1 for f in sweep) == 3

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            FilterBank(filters=[])

    def test_rejects_duplicates(self):
        with pytest.raises(ValidationError):
            FilterBank.from_cutoffs([0.4, 0.4])

    def test_rejects_non_positive_cutoff(self):
        with pytest.raises(ValidationError):
            FilterParams(cutoff=0.0)
