#!/usr/bin/env python3
"""
DKPP Problem Module
Problem coefficients, the time window [0, T] and space-time fields u(x_j, t_m).
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from errors import DataError, DimensionError, ParameterError
from model.kernel import KernelSpec
from model.nonlinearity import NonlinearitySpec
from spectral.grid import Grid
from spectral.transform import check_samples, forward_transform, h2alpha_norm, warn_if_not_decayed

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """
    du/dt = -(-d^2/dx^2)^alpha u + b du/dx + a u + (G * F(u, .)),  u(., 0) = u0.

    alpha = 1 is the classical Laplacian and is accepted only with oracle_mode.
    """

    alpha: float
    a: float
    b: float
    kernel: KernelSpec
    nonlinearity: NonlinearitySpec
    u0: np.ndarray
    grid: Grid
    oracle_mode: bool = False

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0 or (self.alpha == 1.0 and self.oracle_mode)):
            raise ParameterError(
                f"alpha must lie in (0, 1) (alpha = 1 only in oracle mode), got {self.alpha}"
            )
        if not np.isfinite(self.a) or self.a < 0:
            raise ParameterError(f"a must be nonnegative, got {self.a}")
        if not np.isfinite(self.b):
            raise ParameterError(f"b must be finite, got {self.b}")
        if self.kernel.grid != self.grid or self.nonlinearity.grid != self.grid:
            raise DimensionError("kernel, nonlinearity and problem must share one grid")
        u0 = check_samples(self.u0, self.grid, "u0")
        if np.iscomplexobj(u0):
            raise DataError("u0 must be real")
        if not np.isfinite(h2alpha_norm(u0, self.grid, 1.0)):
            raise DataError("u0 must have a finite H^2 norm")

    def with_initial(self, u0) -> "ProblemSpec":
        return replace(self, u0=np.array(u0, dtype=float))

    def describe(self) -> dict:
        return {
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "oracle_mode": self.oracle_mode,
            "grid": self.grid.describe(),
            "kernel": self.kernel.describe(),
            "nonlinearity": self.nonlinearity.describe(),
        }


def check_initial_decay(problem: ProblemSpec) -> bool:
    return warn_if_not_decayed(problem.u0, "u0")


@dataclass(frozen=True)
class TimeWindow:
    """[0, T] split into M equal steps; levels t_m = m T / M so t_M == T exactly."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ParameterError(f"steps must be a positive integer, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def levels(self) -> np.ndarray:
        return self.horizon * np.arange(self.steps + 1) / self.steps

    def describe(self) -> dict:
        return {"horizon": self.horizon, "steps": self.steps}


class SpaceTimeField:
    """
    Real samples u(x_j, t_m), shape (M + 1, N), with lazily cached spectra.

    Treat instances as immutable; arithmetic returns new fields.
    """

    def __init__(self, values, grid: Grid, window: TimeWindow):
        values = check_samples(np.asarray(values, dtype=float), grid, "space-time field")
        if values.shape != (window.steps + 1, grid.n_points):
            raise DimensionError(
                f"field has shape {values.shape}, expected {(window.steps + 1, grid.n_points)}"
            )
        self.values = values
        self.grid = grid
        self.window = window

    @classmethod
    def constant_extension(cls, profile, grid: Grid, window: TimeWindow) -> "SpaceTimeField":
        return cls(np.tile(np.asarray(profile, dtype=float), (window.steps + 1, 1)), grid, window)

    @classmethod
    def zeros(cls, grid: Grid, window: TimeWindow) -> "SpaceTimeField":
        return cls(np.zeros((window.steps + 1, grid.n_points)), grid, window)

    @cached_property
    def spectra(self) -> np.ndarray:
        return forward_transform(self.values, self.grid)

    def level(self, m: int) -> np.ndarray:
        return self.values[m]

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def check_compatible(self, other: "SpaceTimeField"):
        if self.grid != other.grid or self.window != other.window:
            raise DimensionError("space-time fields live on different grids or windows")

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        self.check_compatible(other)
        return SpaceTimeField(self.values - other.values, self.grid, self.window)

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        self.check_compatible(other)
        return SpaceTimeField(self.values + other.values, self.grid, self.window)

    def scaled(self, factor: float) -> "SpaceTimeField":
        return SpaceTimeField(factor * self.values, self.grid, self.window)


def finite_difference_time_derivative(field: SpaceTimeField) -> SpaceTimeField:
    """Second-order finite differences in t, for fields that are not images of the Duhamel map."""
    if field.window.steps < 2:
        slope = (field.values[1] - field.values[0]) / field.window.dt
        return SpaceTimeField(np.tile(slope, (2, 1)), field.grid, field.window)
    derivative = np.gradient(field.values, field.window.dt, axis=0, edge_order=2)
    return SpaceTimeField(derivative, field.grid, field.window)


def random_smooth_field(grid: Grid, window: TimeWindow, rng: np.random.Generator, bumps: int = 3):
    """
    Random smooth space-time field and its exact time derivative.

    Each bump is A exp(-(x - c)^2 / (2 w^2)) (1 + beta t + gamma sin(omega t)).

    Returns:
        tuple: (field, time derivative) as SpaceTimeFields
    """
    x = grid.x[None, :]
    t = window.levels[:, None]
    values = np.zeros((window.steps + 1, grid.n_points))
    derivative = np.zeros_like(values)
    spread = 0.25 * grid.half_width
    for _ in range(bumps):
        amplitude = rng.uniform(-1.0, 1.0)
        centre = rng.uniform(-spread, spread)
        width = rng.uniform(0.7, 2.0)
        beta, gamma = rng.uniform(-1.0, 1.0, size=2)
        omega = rng.uniform(0.5, 3.0)
        shape = amplitude * np.exp(-(x - centre) ** 2 / (2.0 * width ** 2))
        values += shape * (1.0 + beta * t + gamma * np.sin(omega * t))
        derivative += shape * (beta + gamma * omega * np.cos(omega * t))
    return SpaceTimeField(values, grid, window), SpaceTimeField(derivative, grid, window)
