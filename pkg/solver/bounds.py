#!/usr/bin/env python3
"""
DKPP A-Priori Bounds Module
Upper bounds on the two parts of the map image in L2(R x [0, T]), for the field
itself and for its p^2-weighted (second derivative) part:

    semigroup:  int_0^T e^(2at) dt * ||u0||^2            (and ||u0''||^2)
    Duhamel:    e^(2aT) ||G||_1^2 {k ||v|| + sqrt(T) ||h||}^2 T^2   (and ||G''||_1)
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import trapezoid

from model.problem import ProblemSpec, SpaceTimeField, TimeWindow
from solver.duhamel import (
    duhamel_integral,
    forcing_spectra,
    semigroup_term,
    space_time_l2,
)
from spectral.transform import forward_transform, l2_norm, spectral_l2_norm


@dataclass(frozen=True)
class EnergyCheck:
    semigroup: float
    semigroup_bound: float
    semigroup_closed_form_bound: float
    semigroup_p2: float
    semigroup_p2_bound: float
    duhamel: float
    duhamel_bound: float
    duhamel_p2: float
    duhamel_p2_bound: float

    @property
    def holds(self) -> bool:
        slack = 1.0 + 1e-9
        return (
            self.semigroup <= self.semigroup_bound * slack + 1e-12
            and self.semigroup_p2 <= self.semigroup_p2_bound * slack + 1e-12
            and self.duhamel <= self.duhamel_bound * slack + 1e-12
            and self.duhamel_p2 <= self.duhamel_p2_bound * slack + 1e-12
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["holds"] = self.holds
        return out


def growth_integral(a: float, horizon: float) -> float:
    """int_0^T e^(2at) dt, with the a = 0 limit T."""
    if a == 0.0:
        return horizon
    return float(np.expm1(2.0 * a * horizon) / (2.0 * a))


def discrete_growth_integral(a: float, window: TimeWindow) -> float:
    """Trapezoid counterpart of growth_integral on the window levels."""
    return float(trapezoid(np.exp(2.0 * a * window.levels), dx=window.dt))


def energy_bounds(problem: ProblemSpec, window: TimeWindow, v: SpaceTimeField) -> EnergyCheck:
    """
    Measures both parts of t_{a,b} v and evaluates their a-priori bounds.

    The semigroup bounds use the trapezoid weights of the measured norms so the
    comparison is like for like; the closed-form semigroup bound is reported
    alongside. The Duhamel bounds use the closed forms.
    """
    grid = problem.grid
    p2 = grid.p ** 2
    u0_hat = forward_transform(problem.u0, grid)
    semigroup = semigroup_term(problem, window)
    integral = duhamel_integral(problem, window, forcing_spectra(problem, v))

    weight = discrete_growth_integral(problem.a, window)
    u0_sq = spectral_l2_norm(u0_hat, grid) ** 2
    u0_p2_sq = spectral_l2_norm(p2 * u0_hat, grid) ** 2

    horizon = window.horizon
    v_norm = space_time_l2(v.spectra, grid, window)
    h_norm = l2_norm(problem.nonlinearity.growth_offset, grid)
    common = np.exp(2.0 * problem.a * horizon) * (problem.nonlinearity.growth_k * v_norm + np.sqrt(horizon) * h_norm) ** 2 * horizon ** 2

    return EnergyCheck(
        semigroup=space_time_l2(semigroup, grid, window),
        semigroup_bound=float(np.sqrt(weight * u0_sq)),
        semigroup_closed_form_bound=float(np.sqrt(growth_integral(problem.a, horizon) * u0_sq)),
        semigroup_p2=space_time_l2(p2 * semigroup, grid, window),
        semigroup_p2_bound=float(np.sqrt(weight * u0_p2_sq)),
        duhamel=space_time_l2(integral, grid, window),
        duhamel_bound=float(np.sqrt(common) * problem.kernel.l1_g),
        duhamel_p2=space_time_l2(p2 * integral, grid, window),
        duhamel_p2_bound=float(np.sqrt(common) * problem.kernel.l1_g2),
    )
