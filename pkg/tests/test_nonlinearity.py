"""Nonlinearity evaluation and the growth / Lipschitz sweeps."""

import numpy as np
import pytest

from errors import AssumptionViolation, ConfigError, DataError, ParameterError
from model.nonlinearity import (
    build_nonlinearity,
    estimate_lipschitz,
    evaluate,
    nonlinearity_from_descriptor,
    verify_growth,
)
from model.profiles import gaussian_profile


class TestEvaluate:
    def test_linear(self, grid):
        spec = build_nonlinearity("linear", grid, coefficient=0.3)
        field = np.linspace(-1, 1, grid.n_points)
        np.testing.assert_allclose(evaluate(spec, field, grid), 0.3 * field)

    def test_source_is_added(self, grid):
        source = gaussian_profile(grid, 0.2, 1.0)
        spec = build_nonlinearity("saturating", grid, coefficient=1.0, source=source)
        np.testing.assert_allclose(evaluate(spec, np.zeros(grid.n_points), grid), source)
        np.testing.assert_allclose(spec.baseline, source)
        np.testing.assert_allclose(spec.growth_offset, np.abs(source))

    def test_space_time_block(self, grid):
        spec = build_nonlinearity("sine", grid, coefficient=0.5)
        block = np.ones((4, grid.n_points))
        np.testing.assert_allclose(evaluate(spec, block, grid), 0.5 * np.sin(1.0))

    def test_is_pointwise(self, grid, rng):
        spec = build_nonlinearity("saturating", grid, coefficient=0.7, source=gaussian_profile(grid, 0.2, 1.0))
        field = rng.standard_normal(grid.n_points)
        changed = field.copy()
        changed[17] += 3.0
        difference = evaluate(spec, changed, grid) - evaluate(spec, field, grid)
        assert difference[17] != 0.0
        assert np.count_nonzero(difference) == 1

    def test_baseline_spectrum_is_hermitian(self, grid):
        source = gaussian_profile(grid, 0.3, 1.2) * np.cos(grid.x)
        spectrum = build_nonlinearity("sine", grid, coefficient=0.4, source=source).baseline_spectrum
        mirrored = spectrum[(-np.arange(grid.n_points)) % grid.n_points]
        np.testing.assert_allclose(mirrored, np.conj(spectrum), atol=1e-12)

    def test_non_finite_output_names_x(self, grid):
        spec = build_nonlinearity("custom", grid, growth_k=1.0, lipschitz_l=1.0, custom=lambda u, x: u / (x - x[3]))
        with pytest.raises(DataError, match="x = "):
            evaluate(spec, np.zeros(grid.n_points), grid)


class TestConstants:
    def test_defaults_from_coefficient(self, grid):
        spec = build_nonlinearity("saturating", grid, coefficient=-0.2)
        assert spec.growth_k == pytest.approx(0.2)
        assert spec.lipschitz_l == pytest.approx(0.2)

    def test_quadratic_needs_declared_constants(self, grid):
        with pytest.raises(ConfigError, match="quadratic"):
            build_nonlinearity("quadratic", grid, coefficient=1.0)

    def test_unknown_kind(self, grid):
        with pytest.raises(ConfigError, match="unknown rate"):
            build_nonlinearity("cubic", grid)

    def test_negative_constants(self, grid):
        with pytest.raises(ParameterError, match="nonnegative"):
            build_nonlinearity("linear", grid, coefficient=0.1, lipschitz_l=-1.0)

    def test_descriptor(self, grid):
        spec = nonlinearity_from_descriptor(
            {"kind": "linear", "c": 0.1, "source": {"kind": "gaussian", "amplitude": 0.5, "sigma": 2.0}}, grid
        )
        assert spec.coefficient == 0.1
        assert spec.source.max() == pytest.approx(0.5, rel=1e-3)


class TestLipschitz:
    def test_saturating_estimate_is_close_to_declared(self, grid):
        spec = build_nonlinearity("saturating", grid, coefficient=0.1)
        estimate = estimate_lipschitz(spec, (-10.0, 10.0), 4096, seed=3)
        assert 0.09 < estimate <= 0.1 * (1 + 1e-9)

    def test_sine_estimate_reaches_its_slope(self, grid):
        spec = build_nonlinearity("sine", grid, coefficient=0.3)
        estimate = estimate_lipschitz(spec, (-10.0, 10.0), 10_000, seed=0)
        assert 0.299 <= estimate <= 0.3 * (1 + 1e-9)

    @pytest.mark.parametrize("c", [0.25, -0.25, 1.5])
    def test_linear_estimate_is_exact(self, grid, c):
        spec = build_nonlinearity("linear", grid, coefficient=c)
        assert estimate_lipschitz(spec, (-10.0, 10.0), 4096, seed=2) == pytest.approx(abs(c), rel=1e-9)

    def test_samples_stay_in_range(self, grid):
        seen = []

        def recording(u, x):
            seen.append(np.asarray(u).copy())
            return np.zeros_like(u)

        spec = build_nonlinearity("custom", grid, growth_k=0.0, lipschitz_l=0.0, custom=recording)
        estimate_lipschitz(spec, (-10.0, 10.0), 10_000, seed=0)
        sampled = np.concatenate(seen)
        assert sampled.min() >= -10.0
        assert sampled.max() <= 10.0

    def test_underdeclared_constant_gives_witness(self, grid):
        spec = build_nonlinearity("sine", grid, coefficient=1.0, lipschitz_l=0.5)
        with pytest.raises(AssumptionViolation, match="exceeds declared") as info:
            estimate_lipschitz(spec, (-3.0, 3.0), 4096, seed=0)
        assert set(info.value.witness) == {"u1", "u2", "x"}

    def test_quadratic_on_bounded_range(self, grid):
        spec = build_nonlinearity("quadratic", grid, coefficient=1.0, growth_k=10.0, lipschitz_l=20.0)
        assert estimate_lipschitz(spec, (-10.0, 10.0), 4096, seed=1) <= 20.0

    def test_sweep_is_seeded(self, grid):
        spec = build_nonlinearity("saturating", grid, coefficient=0.4)
        assert estimate_lipschitz(spec, seed=5) == estimate_lipschitz(spec, seed=5)

    def test_too_few_samples(self, grid):
        spec = build_nonlinearity("linear", grid, coefficient=0.1)
        with pytest.raises(ParameterError, match="samples"):
            estimate_lipschitz(spec, (-1.0, 1.0), 10)


class TestGrowth:
    def test_saturating_with_source_passes(self, grid):
        spec = build_nonlinearity("saturating", grid, coefficient=0.5, source=gaussian_profile(grid, 0.1, 1.0))
        report = verify_growth(spec, (-10.0, 10.0), 4096, seed=2)
        assert report.passed
        assert report.witness is None

    def test_quadratic_fails_with_small_k(self, grid):
        spec = build_nonlinearity("quadratic", grid, coefficient=1.0, growth_k=1.0, lipschitz_l=20.0)
        report = verify_growth(spec, (-10.0, 10.0), 4096, seed=2)
        assert not report.passed
        assert abs(report.witness["u"]) > 1.0
        assert report.to_dict()["passed"] is False
