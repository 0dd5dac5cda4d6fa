"""The block map, its time derivative, and the quadrature residual."""

import numpy as np
import pytest

from errors import DimensionError, ParameterError
from model.problem import SpaceTimeField, TimeWindow
from model.profiles import gaussian_profile
from solver.bounds import discrete_growth_integral, energy_bounds, growth_integral
from solver.duhamel import (
    apply_map,
    duhamel_residual,
    problem_symbol,
    semigroup_factor,
    time_derivative,
)
from spectral.transform import forward_transform, l2_norm


class TestSemigroupFactor:
    def test_identity_at_zero(self, linear_problem, grid):
        np.testing.assert_array_equal(semigroup_factor(linear_problem, grid, 0.0), 1.0)

    def test_magnitude_bound(self, problem_factory, grid):
        problem = problem_factory(grid, a=0.3, b=1.2)
        factor = semigroup_factor(problem, grid, 0.7)
        assert np.all(np.abs(factor) <= np.exp(0.3 * 0.7) * (1 + 1e-14))

    def test_semigroup_property(self, problem_factory, grid):
        problem = problem_factory(grid, a=0.2, b=0.5)
        combined = semigroup_factor(problem, grid, 0.3) * semigroup_factor(problem, grid, 0.4)
        np.testing.assert_allclose(combined, semigroup_factor(problem, grid, 0.7), rtol=1e-13)

    def test_negative_duration(self, linear_problem, grid):
        with pytest.raises(ParameterError, match="nonnegative"):
            semigroup_factor(linear_problem, grid, -0.1)

    def test_grid_mismatch(self, linear_problem, small_grid):
        with pytest.raises(DimensionError):
            semigroup_factor(linear_problem, small_grid, 0.1)


class TestApplyMap:
    def test_zero_rate_gives_semigroup_evolution(self, problem_factory, grid):
        problem = problem_factory(grid, kind="zero", c=0.0, a=0.1, b=0.3)
        window = TimeWindow(1.0, 20)
        v = SpaceTimeField.zeros(grid, window)
        u = apply_map(problem, window, v)
        expected = semigroup_factor(problem, grid, 1.0) * forward_transform(problem.u0, grid)
        np.testing.assert_allclose(u.spectra[-1], expected, atol=1e-13)

    def test_level_zero_is_initial_condition(self, saturating_problem, grid, short_window, rng):
        v = SpaceTimeField(rng.standard_normal((short_window.steps + 1, grid.n_points)) * 0.1, grid, short_window)
        u = apply_map(saturating_problem, short_window, v)
        np.testing.assert_array_equal(u.level(0), saturating_problem.u0)

    def test_constant_forcing_closed_form(self, problem_factory, grid):
        # F = s(x) constant in time: I(t) = (e^{mt} - 1)/m g, with the m = 0 limit t g
        source = gaussian_profile(grid, 0.3, 1.0)
        problem = problem_factory(grid, kind="zero", c=0.0, source=source, u0=np.zeros(grid.n_points))
        window = TimeWindow(0.5, 2000)
        u = apply_map(problem, window, SpaceTimeField.zeros(grid, window))
        m = problem_symbol(problem)
        g = np.sqrt(2 * np.pi) * problem.kernel.spectrum * forward_transform(source, grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(m == 0, 0.5, np.expm1(0.5 * m) / np.where(m == 0, 1.0, m))
        np.testing.assert_allclose(u.spectra[-1], factor * g, atol=1e-8)

    def test_window_mismatch(self, linear_problem, grid):
        window = TimeWindow(1.0, 10)
        other = SpaceTimeField.zeros(grid, TimeWindow(1.0, 20))
        with pytest.raises(DimensionError, match="window"):
            apply_map(linear_problem, window, other)


class TestTimeDerivative:
    def test_matches_finite_differences(self, saturating_problem, grid):
        window = TimeWindow(0.5, 400)
        v = SpaceTimeField.constant_extension(saturating_problem.u0, grid, window)
        u = apply_map(saturating_problem, window, v)
        du = time_derivative(saturating_problem, window, u, v)
        fd = np.gradient(u.values, window.dt, axis=0, edge_order=2)
        interior = slice(5, -5)
        assert np.max(np.abs(du.values[interior] - fd[interior])) < 1e-3

    def test_zero_rate(self, problem_factory, grid):
        problem = problem_factory(grid, kind="zero", c=0.0)
        window = TimeWindow(0.2, 10)
        v = SpaceTimeField.zeros(grid, window)
        u = apply_map(problem, window, v)
        du = time_derivative(problem, window, u, v)
        expected = problem_symbol(problem) * u.spectra
        np.testing.assert_allclose(du.spectra, expected, atol=1e-12)


class TestDuhamelResidual:
    def test_second_order_in_dt(self, saturating_problem, grid):
        residuals = []
        for steps in (50, 100):
            window = TimeWindow(0.5, steps)
            v = SpaceTimeField.constant_extension(saturating_problem.u0, grid, window)
            u = apply_map(saturating_problem, window, v)
            residuals.append(duhamel_residual(saturating_problem, window, u, v))
        assert residuals[1] < residuals[0]
        assert 1.9 <= np.log2(residuals[0] / residuals[1]) <= 2.1

    def test_zero_rate_is_exact(self, problem_factory, grid):
        problem = problem_factory(grid, kind="zero", c=0.0)
        window = TimeWindow(0.3, 12)
        v = SpaceTimeField.zeros(grid, window)
        assert duhamel_residual(problem, window, apply_map(problem, window, v), v) < 1e-12


class TestEnergyBounds:
    def test_growth_integral(self):
        assert growth_integral(0.0, 2.0) == 2.0
        assert growth_integral(0.5, 1.0) == pytest.approx(np.e - 1.0)

    def test_discrete_weight_is_close(self):
        window = TimeWindow(1.0, 1000)
        assert discrete_growth_integral(0.5, window) == pytest.approx(np.e - 1.0, rel=1e-6)

    def test_closed_form_semigroup_bound(self, problem_factory, grid, short_window):
        problem = problem_factory(grid, kind="zero", c=0.0, a=0.3)
        check = energy_bounds(problem, short_window, SpaceTimeField.zeros(grid, short_window))
        expected = np.sqrt(growth_integral(0.3, short_window.horizon)) * l2_norm(problem.u0, grid)
        assert check.semigroup_closed_form_bound == pytest.approx(expected, rel=1e-12)
        assert check.semigroup_closed_form_bound <= check.semigroup_bound
        assert check.semigroup_closed_form_bound == pytest.approx(check.semigroup_bound, rel=1e-4)
        assert check.to_dict()["semigroup_closed_form_bound"] == check.semigroup_closed_form_bound

    def test_bounds_hold_for_map_image(self, saturating_problem, grid, short_window):
        v = SpaceTimeField.constant_extension(saturating_problem.u0, grid, short_window)
        check = energy_bounds(saturating_problem, short_window, v)
        assert check.holds
        assert check.to_dict()["holds"] is True
        assert check.duhamel <= check.duhamel_bound

    def test_semigroup_bound_is_tight_without_decay(self, problem_factory, grid):
        problem = problem_factory(grid, kind="zero", c=0.0, a=0.2, u0=np.exp(-grid.x ** 2 / 400))
        window = TimeWindow(0.1, 50)
        check = energy_bounds(problem, window, SpaceTimeField.zeros(grid, window))
        assert check.semigroup <= check.semigroup_bound
        assert check.semigroup == pytest.approx(check.semigroup_bound, rel=0.05)
