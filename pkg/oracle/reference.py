#!/usr/bin/env python3
"""
DKPP Reference Oracles
Independent reference computations for the solver. Everything here works on
numpy.fft and dense matrices directly; nothing goes through the scipy.fft
transform path or the exponential-trapezoid recurrence it is meant to check.
Desk scale only (N <= 512, M <= 1e4).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import ParameterError, RefusalError
from model.kernel import KernelSpec
from model.problem import ProblemSpec, SpaceTimeField, TimeWindow
from spectral.grid import Grid

logger = logging.getLogger(__name__)

ROOT_2PI = math.sqrt(2.0 * math.pi)


@dataclass
class OracleResult:
    """
    Reference field plus an estimate of the oracle's own error.

    Attributes:
        reference (SpaceTimeField): Reference samples on the window levels
        method (str): 'linear_closed_form' or 'method_of_lines'
        accuracy (float): Estimated L2(R x [0, T]) error of the reference
    """

    reference: SpaceTimeField
    method: str
    accuracy: float

    def to_dict(self) -> dict:
        return {"method": self.method, "accuracy": self.accuracy}


def _parity(n: int) -> np.ndarray:
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    return np.where(k % 2 == 0, 1.0, -1.0)


def _spectrum(samples: np.ndarray, grid: Grid) -> np.ndarray:
    return (grid.dx / ROOT_2PI) * _parity(grid.n_points) * np.fft.fft(samples, axis=-1)


def _samples(spectrum: np.ndarray, grid: Grid) -> np.ndarray:
    n = grid.n_points
    return (grid.dp * n / ROOT_2PI) * np.fft.ifft(_parity(n) * spectrum, axis=-1)


def _symbol(problem: ProblemSpec) -> np.ndarray:
    grid = problem.grid
    n = grid.n_points
    p = (np.pi / grid.half_width) * np.fft.fftfreq(n, d=1.0 / n)
    drift = 1j * problem.b * p
    drift[n // 2] = 0.0
    return -np.abs(p) ** (2.0 * problem.alpha) + drift + problem.a


def convolution_matrix(kernel: KernelSpec, grid: Grid) -> np.ndarray:
    """C[i, j] = G(x_i - y_j) dx with periodic wrap, as G_values[(i - j + N/2) mod N] dx."""
    n = grid.n_points
    index = (np.arange(n)[:, None] - np.arange(n)[None, :] + n // 2) % n
    return kernel.values[index] * grid.dx


def direct_convolution(kernel: KernelSpec, field, grid: Grid) -> np.ndarray:
    """O(N^2) periodic quadrature sum_j G(x - y_j) f(y_j) dx."""
    field = np.asarray(field, dtype=float)
    return field @ convolution_matrix(kernel, grid).T


def _kernel_spectrum(problem: ProblemSpec) -> np.ndarray:
    return _spectrum(problem.kernel.values, problem.grid)


def linear_mode_solution(problem: ProblemSpec, t: float) -> np.ndarray:
    """
    Per-mode closed form for F(u, x) = c u + s(x):

        u_hat(t) = e^(lambda t) u0_hat + (e^(lambda t) - 1) / lambda * sqrt(2 pi) G_hat s_hat,
        lambda = -|p|^(2 alpha) + i b p + a + sqrt(2 pi) c G_hat,

    with the lambda -> 0 limit t for the forcing factor.

    Returns:
        np.ndarray: Spectral coefficients at time t in FFT order

    Raises:
        ParameterError: If F is not a built-in linear rate or t < 0
    """
    spec = problem.nonlinearity
    if not spec.is_linear:
        raise ParameterError(f"linear_mode_solution needs a linear rate, got {spec.kind!r}")
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    grid = problem.grid
    c = spec.coefficient if spec.kind == "linear" else 0.0
    g_hat = _kernel_spectrum(problem)
    rate = _symbol(problem) + ROOT_2PI * c * g_hat
    out = np.exp(rate * t) * _spectrum(problem.u0, grid)

    if np.any(spec.source != 0.0):
        forcing = ROOT_2PI * g_hat * _spectrum(spec.source, grid)
        small = np.abs(rate) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(small, t, np.expm1(rate * t) / np.where(small, 1.0, rate))
        out = out + factor * forcing
    return out


def linear_reference(problem: ProblemSpec, window: TimeWindow) -> OracleResult:
    grid = problem.grid
    values = np.array([_samples(linear_mode_solution(problem, t), grid).real for t in window.levels])
    scale = float(np.max(np.abs(values), initial=1.0))
    return OracleResult(
        reference=SpaceTimeField(values, grid, window),
        method="linear_closed_form",
        accuracy=1e-13 * scale * math.sqrt(2.0 * grid.half_width * window.horizon),
    )


def required_substeps(problem: ProblemSpec, window: TimeWindow) -> int:
    """Smallest substep count with dt_sub * max_k |m_k| <= 1."""
    return max(1, math.ceil(window.dt * float(np.max(np.abs(_symbol(problem)))) - 1e-12))


def method_of_lines_reference(problem: ProblemSpec, window: TimeWindow, substeps: int) -> SpaceTimeField:
    """
    Classical RK4 on du/dt = ifft(m fft(u)) + C F(u), C the dense convolution
    matrix, with `substeps` RK4 steps per window step.

    Raises:
        RefusalError: If dt_sub * max_k |m_k| > 1, stating the required substep count
    """
    grid = problem.grid
    needed = required_substeps(problem, window)
    if substeps < needed:
        raise RefusalError(
            f"RK4 stability needs dt_sub * max|m| <= 1: use at least {needed} substeps (got {substeps})"
        )

    symbol = _symbol(problem)
    matrix = convolution_matrix(problem.kernel, grid)
    rate = problem.nonlinearity.evaluator
    j = np.arange(grid.n_points)

    def rhs(u):
        linear = np.fft.ifft(symbol * np.fft.fft(u)).real
        return linear + matrix @ rate(u, j)

    h = window.dt / substeps
    u = np.array(problem.u0, dtype=float)
    levels = [u.copy()]
    for _ in range(window.steps):
        for _ in range(substeps):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * h * k1)
            k3 = rhs(u + 0.5 * h * k2)
            k4 = rhs(u + h * k3)
            u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        levels.append(u.copy())
    return SpaceTimeField(np.array(levels), grid, window)


def _space_time_distance(first: SpaceTimeField, second: SpaceTimeField) -> float:
    per_level = first.grid.dx * np.sum((first.values - second.values) ** 2, axis=-1)
    dt = first.window.dt
    return float(math.sqrt(dt * (per_level.sum() - 0.5 * (per_level[0] + per_level[-1]))))


def reference_solution(problem: ProblemSpec, window: TimeWindow, substeps: Optional[int] = None) -> OracleResult:
    """
    Linear rates use the closed form; anything else runs the method of lines at
    s and 2s substeps and reports their distance as the accuracy estimate.
    """
    if problem.nonlinearity.is_linear:
        return linear_reference(problem, window)
    coarse_steps = substeps or required_substeps(problem, window)
    coarse = method_of_lines_reference(problem, window, coarse_steps)
    fine = method_of_lines_reference(problem, window, 2 * coarse_steps)
    accuracy = _space_time_distance(coarse, fine)
    logger.info(f"Method-of-lines reference at {2 * coarse_steps} substeps, estimated error {accuracy:.3e}")
    return OracleResult(reference=fine, method="method_of_lines", accuracy=accuracy)


def gaussian_kernel_norms(sigma: float):
    """
    Closed forms for g(x) = exp(-x^2 / (2 sigma^2)) / (sigma sqrt(2 pi)).

    g'' changes sign at x = +-sigma, so ||g''||_1 = 4 |g'(sigma)| = 4 e^(-1/2) / (sigma^2 sqrt(2 pi)).

    Returns:
        tuple: (l1_G, l1_G2, Q)
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    l1_g2 = 4.0 * math.exp(-0.5) / (sigma ** 2 * ROOT_2PI)
    return 1.0, l1_g2, math.sqrt(1.0 + l1_g2 ** 2)


def heat_gaussian(grid: Grid, t: float) -> np.ndarray:
    """Exact heat evolution of exp(-x^2): exp(-x^2 / (1 + 4t)) / sqrt(1 + 4t)."""
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    spread = 1.0 + 4.0 * t
    return np.exp(-grid.x ** 2 / spread) / math.sqrt(spread)
