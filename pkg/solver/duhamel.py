#!/usr/bin/env python3
"""
DKPP Duhamel Map Module
The block map u = t_{a,b} v on [0, T]:

    u_hat(p, t) = E(t) u0_hat(p) + integral_0^t E(t - s) sqrt(2 pi) G_hat(p) f_hat_v(p, s) ds,
    E(t) = exp(t (-|p|^(2 alpha) + i b p + a)).

The semigroup factor is exact; the integral uses the exponential-trapezoid
recurrence
    I_{m+1} = E(dt) I_m + dt/2 (E(dt) g_m + g_{m+1}),   g = sqrt(2 pi) G_hat f_hat_v,
which is second order in dt. Modes are independent, so each step is one
vectorized update over all frequencies.
"""

import logging

import numpy as np
from scipy.integrate import simpson, trapezoid

from errors import DataError, DimensionError, ParameterError
from model.nonlinearity import evaluate
from model.problem import ProblemSpec, SpaceTimeField, TimeWindow
from spectral.grid import Grid
from spectral.transform import SQRT_2PI, forward_transform, inverse_transform, linear_symbol, to_real

logger = logging.getLogger(__name__)


def problem_symbol(problem: ProblemSpec) -> np.ndarray:
    return linear_symbol(problem.grid, problem.alpha, problem.a, problem.b)


def semigroup_factor(problem: ProblemSpec, grid: Grid, t: float) -> np.ndarray:
    """
    Per-mode exp(t m_k); |factor| = exp(t (a - |p_k|^(2 alpha))) <= exp(t a).

    Raises:
        ParameterError: If t < 0
    """
    if t < 0:
        raise ParameterError(f"semigroup duration must be nonnegative, got {t}")
    if grid != problem.grid:
        raise DimensionError("grid differs from the problem grid")
    return np.exp(t * problem_symbol(problem))


def _check_window(problem: ProblemSpec, window: TimeWindow, *fields: SpaceTimeField):
    for field in fields:
        if field.grid != problem.grid or field.window != window:
            raise DimensionError("field does not live on the problem grid and window")


def forcing_spectra(problem: ProblemSpec, v: SpaceTimeField) -> np.ndarray:
    """g(p_k, t_m) = sqrt(2 pi) G_hat(p_k) f_hat_v(p_k, t_m)."""
    rates = evaluate(problem.nonlinearity, v.values, problem.grid)
    spectra = SQRT_2PI * problem.kernel.spectrum * forward_transform(rates, problem.grid)
    if not np.all(np.isfinite(spectra)):
        raise DataError("forcing spectrum is not finite")
    return spectra


def duhamel_integral(problem: ProblemSpec, window: TimeWindow, forcing: np.ndarray) -> np.ndarray:
    """
    Exponential-trapezoid quadrature of the Duhamel integral at every level.

    Args:
        problem (ProblemSpec): Supplies the symbol
        window (TimeWindow): Time levels
        forcing (np.ndarray): g(p_k, t_m), shape (M + 1, N)

    Returns:
        np.ndarray: I(p_k, t_m), shape (M + 1, N), with I(., 0) = 0
    """
    expected = (window.steps + 1, problem.grid.n_points)
    if forcing.shape != expected:
        raise DimensionError(f"forcing has shape {forcing.shape}, expected {expected}")
    step = semigroup_factor(problem, problem.grid, window.dt)
    half_dt = 0.5 * window.dt
    integral = np.zeros(expected, dtype=complex)
    for m in range(window.steps):
        integral[m + 1] = step * (integral[m] + half_dt * forcing[m]) + half_dt * forcing[m + 1]
    return integral


def semigroup_term(problem: ProblemSpec, window: TimeWindow) -> np.ndarray:
    """E(t_m) u0_hat at every level, shape (M + 1, N)."""
    u0_hat = forward_transform(problem.u0, problem.grid)
    return np.exp(window.levels[:, None] * problem_symbol(problem)[None, :]) * u0_hat[None, :]


def apply_map(problem: ProblemSpec, window: TimeWindow, v: SpaceTimeField) -> SpaceTimeField:
    """
    One application u = t_{a,b} v.

    Level 0 of v is ignored; u(., 0) is pinned to u0.

    Returns:
        SpaceTimeField: The image u
    """
    _check_window(problem, window, v)
    spectra = semigroup_term(problem, window) + duhamel_integral(problem, window, forcing_spectra(problem, v))
    values = to_real(inverse_transform(spectra, problem.grid))
    values[0] = problem.u0
    return SpaceTimeField(values, problem.grid, window)


def time_derivative(problem: ProblemSpec, window: TimeWindow, u: SpaceTimeField, v: SpaceTimeField) -> SpaceTimeField:
    """
    du/dt for u = t_{a,b} v from d u_hat/dt = m u_hat + sqrt(2 pi) G_hat f_hat_v.

    Exact within the spatial representation; no differencing in time.
    """
    _check_window(problem, window, u, v)
    spectra = problem_symbol(problem)[None, :] * u.spectra + forcing_spectra(problem, v)
    return SpaceTimeField(to_real(inverse_transform(spectra, problem.grid)), problem.grid, window)


def _simpson_integrals(problem: ProblemSpec, window: TimeWindow, forcing: np.ndarray) -> np.ndarray:
    """Duhamel integral at each level by composite Simpson over the stored levels."""
    symbol = problem_symbol(problem)
    powers = np.exp(window.levels[:, None] * symbol[None, :])  # E(m dt)
    dt = window.dt
    out = np.zeros_like(forcing, dtype=complex)
    for m in range(1, window.steps + 1):
        integrand = powers[m::-1] * forcing[: m + 1]
        if m == 1:
            out[m] = trapezoid(integrand, dx=dt, axis=0)
        else:
            out[m] = simpson(integrand.real, dx=dt, axis=0) + 1j * simpson(integrand.imag, dx=dt, axis=0)
    return out


def space_time_l2(spectra: np.ndarray, grid: Grid, window: TimeWindow) -> float:
    """L2(R x [0, T]) norm from per-level spectra, trapezoid in time."""
    per_level = grid.dp * np.sum(np.abs(spectra) ** 2, axis=-1)
    return float(np.sqrt(trapezoid(per_level, dx=window.dt)))


def duhamel_residual(problem: ProblemSpec, window: TimeWindow, u: SpaceTimeField, v: SpaceTimeField) -> float:
    """
    L2(R x [0, T]) distance between u_hat and E(t) u0_hat plus an independent
    Simpson evaluation of the Duhamel integral driven by v.

    Measures the time-quadrature error of apply_map (O(dt^2) for u = apply_map(v)).
    """
    _check_window(problem, window, u, v)
    reference = semigroup_term(problem, window) + _simpson_integrals(problem, window, forcing_spectra(problem, v))
    return space_time_l2(u.spectra - reference, problem.grid, window)
