"""Contraction constant and the admissible horizon."""

import math

import numpy as np
import pytest

from model.problem import SpaceTimeField, TimeWindow, random_smooth_field
from model.profiles import gaussian_profile
from solver.certificate import certify, contraction_constant, horizon_for, max_horizon
from solver.duhamel import apply_map, time_derivative
from solver.picard import contraction_ratio


class TestContractionConstant:
    def test_zero_horizon_is_ql(self):
        assert contraction_constant(1.0, 0.2, 0.0, 0.0, 0.0) == pytest.approx(0.2)

    def test_gaussian_kernel_example(self):
        assert contraction_constant(1.39169, 0.05, 0.1, 0.5, 1.0) == pytest.approx(0.20258, abs=1e-5)

    def test_large_example(self):
        assert contraction_constant(1.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(11.89, abs=0.01)

    def test_drift_sign_is_irrelevant(self):
        assert contraction_constant(1.2, 0.3, 0.1, -0.7, 2.0) == contraction_constant(1.2, 0.3, 0.1, 0.7, 2.0)

    def test_monotone_over_log_spaced_horizons(self):
        values = [contraction_constant(1.39169, 0.05, 0.1, 0.5, t) for t in np.logspace(-4, 3, 60)]
        assert all(later > earlier for earlier, later in zip(values, values[1:]))

    def test_overflow_gives_infinity(self):
        assert contraction_constant(1.39169, 0.1, 1.0, 0.5, 4000.0) == math.inf

    def test_log_space_matches_direct_formula(self):
        direct = 1.3 * 0.2 * math.sqrt(2.5 ** 2 * math.exp(2 * 0.3 * 2.5) * (1 + 2 * (0.3 + 0.8 + 1) ** 2) + 1)
        assert contraction_constant(1.3, 0.2, 0.3, -0.8, 2.5) == pytest.approx(direct, rel=1e-12)

    def test_monotone_in_every_argument(self):
        base = dict(q=1.0, l=0.3, a=0.1, b=0.5, horizon=1.0)
        reference = contraction_constant(**base)
        for name in base:
            bumped = dict(base, **{name: base[name] + 0.1})
            assert contraction_constant(**bumped) > reference


class TestCertify:
    def test_problem_certificate(self, problem_factory, grid):
        source = gaussian_profile(grid, 0.05, 1.5)
        problem = problem_factory(grid, kind="saturating", c=0.05, a=0.1, b=0.5, source=source)
        certificate = certify(problem, TimeWindow(1.0, 10))
        assert certificate.q == pytest.approx(1.39169, abs=1e-5)
        assert certificate.constant == pytest.approx(0.20258, abs=1e-4)
        assert certificate.admissible
        assert certificate.margin == pytest.approx(1.0 - certificate.constant)

    def test_to_dict(self, linear_problem):
        payload = certify(linear_problem, TimeWindow(1.0, 10)).to_dict()
        assert set(payload) >= {"q", "l", "k", "a", "b", "horizon", "constant", "admissible", "margin"}

    def test_long_horizon_is_inadmissible(self, saturating_problem):
        certificate = certify(saturating_problem, TimeWindow(4000.0, 10))
        assert certificate.constant > 1e100
        assert not certificate.admissible

    def test_inadmissible_is_a_verdict(self, problem_factory, grid):
        problem = problem_factory(grid, c=0.9)
        certificate = certify(problem, TimeWindow(5.0, 10))
        assert not certificate.admissible
        assert certificate.margin < 0


class TestHorizon:
    def test_root_for_small_ql(self):
        horizon = horizon_for(1.0, 0.1, 0.0, 0.0)
        assert horizon.t_max == pytest.approx(math.sqrt(33.0), abs=1e-6)

    def test_near_unit_ql(self):
        assert horizon_for(1.0, 0.999, 0.0, 0.0).t_max == pytest.approx(0.02584, abs=1e-5)

    @pytest.mark.parametrize("ql", np.linspace(0.05, 0.95, 10))
    def test_closed_form_without_growth(self, ql):
        expected = math.sqrt((1.0 / ql ** 2 - 1.0) / 3.0)
        assert horizon_for(1.0, ql, 0.0, 0.0).t_max == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize(
        "ql,b", list(zip(np.linspace(0.05, 0.95, 10), np.linspace(-2.0, 2.0, 10)))
    )
    def test_closed_form_with_drift(self, ql, b):
        expected = math.sqrt((1.0 / ql ** 2 - 1.0) / (1.0 + 2.0 * (abs(b) + 1.0) ** 2))
        assert horizon_for(1.0, ql, 0.0, b).t_max == pytest.approx(expected, abs=1e-9)

    def test_admissible_just_below(self):
        horizon = horizon_for(1.3, 0.2, 0.3, 0.8)
        assert contraction_constant(1.3, 0.2, 0.3, 0.8, horizon.t_max) < 1.0
        assert contraction_constant(1.3, 0.2, 0.3, 0.8, horizon.t_max + 1e-9) >= 1.0

    def test_no_window_when_ql_reaches_one(self, caplog):
        horizon = horizon_for(1.0, 1.0, 0.0, 0.0)
        assert horizon.t_max == 0.0
        assert ">= 1" in horizon.explanation
        assert "no window" in caplog.text

    def test_unbounded_when_ql_vanishes(self):
        assert horizon_for(1.0, 0.0, 0.5, 2.0).t_max == math.inf

    def test_problem_horizon_matches(self, saturating_problem):
        horizon = max_horizon(saturating_problem)
        assert certify(saturating_problem, TimeWindow(horizon.t_max, 4)).admissible


class TestPerturbedStart:
    def test_distance_contracts_every_iteration(self, saturating_problem, short_window):
        bound = certify(saturating_problem, short_window).constant + 0.05
        rng = np.random.default_rng(17)
        noise, noise_dt = random_smooth_field(saturating_problem.grid, short_window, rng)
        v1 = SpaceTimeField.constant_extension(saturating_problem.u0, saturating_problem.grid, short_window)
        v1_dt = SpaceTimeField.zeros(saturating_problem.grid, short_window)
        v2, v2_dt = v1 + noise.scaled(1e-3), noise_dt.scaled(1e-3)
        for _ in range(6):
            ratio, _ = contraction_ratio(saturating_problem, short_window, v1, v1_dt, v2, v2_dt)
            assert ratio <= bound
            u1 = apply_map(saturating_problem, short_window, v1)
            u2 = apply_map(saturating_problem, short_window, v2)
            v1, v1_dt, v2, v2_dt = (
                u1,
                time_derivative(saturating_problem, short_window, u1, v1),
                u2,
                time_derivative(saturating_problem, short_window, u2, v2),
            )
