"""Grid, transform pair, multipliers and norms."""

import numpy as np
import pytest

from errors import DataError, DimensionError, ParameterError
from spectral.grid import Grid
from spectral.transform import (
    SQRT_2PI,
    apply_fractional_laplacian,
    apply_multiplier,
    forward_transform,
    fractional_symbol,
    h2alpha_norm,
    inverse_transform,
    l1_norm,
    l2_norm,
    linear_symbol,
    second_derivative,
    spectral_l2_norm,
    warn_if_not_decayed,
)


class TestGrid:
    """Grid construction and frequency layout."""

    def test_spacings(self):
        grid = Grid(8.0, 64)
        assert grid.dx == pytest.approx(0.25)
        assert grid.dp == pytest.approx(np.pi / 8.0)
        assert grid.x[0] == -8.0
        assert grid.x[-1] == pytest.approx(8.0 - 0.25)

    def test_frequencies_in_fft_order(self):
        grid = Grid(np.pi, 8)
        np.testing.assert_array_equal(grid.k, [0, 1, 2, 3, -4, -3, -2, -1])
        assert grid.nyquist_index == 4
        assert grid.p[grid.nyquist_index] == pytest.approx(-4.0)

    @pytest.mark.parametrize("n", [7, 6, 0, 9])
    def test_rejects_bad_point_counts(self, n):
        with pytest.raises(ParameterError, match="n_points"):
            Grid(1.0, n)

    def test_rejects_nonpositive_width(self):
        with pytest.raises(ParameterError, match="half_width"):
            Grid(0.0, 16)


class TestTransform:
    """Forward and inverse transforms."""

    def test_gaussian_matches_continuous_transform(self, grid):
        field = np.exp(-grid.x ** 2 / 2)
        np.testing.assert_allclose(forward_transform(field, grid), np.exp(-grid.p ** 2 / 2), atol=1e-12)

    def test_inverse_recovers_samples(self, grid, rng):
        field = rng.standard_normal(grid.n_points)
        recovered = inverse_transform(forward_transform(field, grid), grid)
        np.testing.assert_allclose(recovered.real, field, atol=1e-12)
        assert np.max(np.abs(recovered.imag)) < 1e-12

    def test_parseval(self, grid, rng):
        field = rng.standard_normal(grid.n_points)
        assert spectral_l2_norm(forward_transform(field, grid), grid) == pytest.approx(l2_norm(field, grid), rel=1e-12)

    def test_transforms_along_last_axis(self, grid, rng):
        block = rng.standard_normal((3, grid.n_points))
        spectra = forward_transform(block, grid)
        np.testing.assert_allclose(spectra[1], forward_transform(block[1], grid))

    def test_real_field_has_hermitian_coefficients(self, grid, rng):
        coefficients = forward_transform(rng.standard_normal(grid.n_points), grid)
        mirrored = coefficients[(-np.arange(grid.n_points)) % grid.n_points]
        np.testing.assert_allclose(mirrored, np.conj(coefficients), atol=1e-12)

    def test_hermitian_spectrum_inverts_to_real_field(self, grid, rng):
        raw = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
        hermitian = 0.5 * (raw + np.conj(raw[(-np.arange(grid.n_points)) % grid.n_points]))
        assert np.max(np.abs(inverse_transform(hermitian, grid).imag)) <= 1e-12

    def test_wrong_length(self, grid):
        with pytest.raises(DimensionError, match="expected last axis"):
            forward_transform(np.zeros(grid.n_points - 1), grid)

    def test_non_finite_names_position(self, grid):
        field = np.zeros(grid.n_points)
        field[10] = np.nan
        with pytest.raises(DataError, match=f"x = {grid.x[10]:.6g}"):
            forward_transform(field, grid)


class TestMultipliers:
    """Fourier multipliers and symbols."""

    def test_alpha_one_is_negative_second_derivative(self):
        grid = Grid(16 * np.pi, 512)
        field = np.exp(-grid.x ** 2)
        expected = -(4 * grid.x ** 2 - 2) * field
        np.testing.assert_allclose(apply_fractional_laplacian(field, grid, 1.0), expected, atol=1e-10)
        np.testing.assert_allclose(second_derivative(field, grid), -expected, atol=1e-10)

    def test_fractional_laplacian_kills_constants_mode(self, grid):
        assert fractional_symbol(grid, 0.5)[0] == 0.0

    @pytest.mark.parametrize("alpha", [0.0, 1.5, -0.2])
    def test_alpha_range(self, grid, alpha):
        with pytest.raises(ParameterError, match="alpha"):
            fractional_symbol(grid, alpha)

    def test_drift_nyquist_zeroed(self, grid):
        symbol = linear_symbol(grid, 0.5, 0.2, 1.0)
        assert symbol[grid.nyquist_index].imag == 0.0
        assert symbol[1].imag == pytest.approx(grid.p[1])
        assert symbol[0] == pytest.approx(0.2)

    def test_multipliers_compose(self, grid):
        field = np.exp(-grid.x ** 2 / 2)
        first = fractional_symbol(grid, 0.25)
        second = np.exp(-0.1 * np.abs(grid.p))
        chained = apply_multiplier(apply_multiplier(field, grid, first), grid, second)
        np.testing.assert_allclose(chained, apply_multiplier(field, grid, first * second), atol=1e-13)

    def test_sine_is_an_eigenfunction(self):
        grid = Grid(np.pi, 16)
        np.testing.assert_allclose(apply_fractional_laplacian(np.sin(grid.x), grid, 0.5), np.sin(grid.x), atol=1e-13)
        np.testing.assert_allclose(
            apply_fractional_laplacian(np.sin(3 * grid.x), grid, 0.5), 3 * np.sin(3 * grid.x), atol=1e-13
        )

    def test_real_input_stays_real(self, grid, rng):
        field = np.exp(-grid.x ** 2) * rng.uniform(0.5, 1.5)
        out = apply_fractional_laplacian(field, grid, 0.3)
        assert np.isrealobj(out)


class TestNorms:
    """L1, L2 and H^{2 alpha} norms."""

    def test_gaussian_l2(self, grid):
        field = np.exp(-grid.x ** 2)
        assert l2_norm(field, grid) == pytest.approx((np.pi / 2) ** 0.25, rel=1e-12)

    def test_gaussian_h2(self):
        grid = Grid(16 * np.pi, 512)
        field = np.exp(-grid.x ** 2)
        squared = h2alpha_norm(field, grid, 1.0) ** 2 - l2_norm(field, grid) ** 2
        # ||u''||^2 for exp(-x^2)
        assert squared == pytest.approx(3 * np.sqrt(np.pi / 2), rel=1e-10)

    def test_h2alpha_increases_with_alpha(self, grid):
        field = np.exp(-grid.x ** 2 / 0.1)
        assert h2alpha_norm(field, grid, 0.25) < h2alpha_norm(field, grid, 0.75)

    def test_l1_of_unit_gaussian(self, grid):
        field = np.exp(-grid.x ** 2 / 2) / SQRT_2PI
        assert l1_norm(field, grid) == pytest.approx(1.0, rel=1e-12)

    def test_zero_field(self, grid):
        zeros = np.zeros(grid.n_points)
        assert l2_norm(zeros, grid) == 0.0
        assert h2alpha_norm(zeros, grid, 0.5) == 0.0


class TestDecayWarning:
    def test_warns_for_wide_field(self, grid, caplog):
        assert warn_if_not_decayed(np.ones(grid.n_points), "flat") is True
        assert "box edge" in caplog.text

    def test_quiet_for_localized_field(self, grid):
        assert warn_if_not_decayed(np.exp(-grid.x ** 2), "narrow") is False
