#!/usr/bin/env python3
"""
DKPP Spectral Transform Module
Discrete form of the unitary Fourier transform
    phi_hat(p) = (2 pi)^(-1/2) * integral of phi(x) exp(-i p x) dx
on a periodic Grid, plus Fourier multipliers and Parseval norms.

Coefficients are kept in FFT order. Forward uses the rectangle rule, so
forward(inverse(c)) == c and both directions are exact inverses up to roundoff.
"""

import logging

import numpy as np
import scipy.fft

from config import BOUNDARY_WARN_RATIO, DKPP_THREADS
from errors import DataError, DimensionError, ParameterError
from spectral.grid import Grid

logger = logging.getLogger(__name__)

SQRT_2PI = np.sqrt(2.0 * np.pi)


def check_samples(field, grid: Grid, name: str = "field") -> np.ndarray:
    """
    Validate that the last axis of field matches the grid and every entry is finite.

    Raises:
        DimensionError: If the last axis length differs from grid.n_points
        DataError: If any entry is NaN or Inf
    """
    field = np.asarray(field)
    if field.ndim == 0 or field.shape[-1] != grid.n_points:
        raise DimensionError(
            f"{name} has shape {field.shape}, expected last axis of length {grid.n_points}"
        )
    if not np.all(np.isfinite(field)):
        bad = np.argwhere(~np.isfinite(field))[0]
        raise DataError(f"{name} contains a non-finite value at x = {grid.x[bad[-1]]:.6g}")
    return field


def forward_transform(field, grid: Grid) -> np.ndarray:
    """
    Transform physical samples to spectral coefficients c_k at p_k.

    Args:
        field: Samples on grid.x (last axis), real or complex
        grid (Grid): The grid

    Returns:
        np.ndarray: Complex coefficients in FFT order, same shape as field
    """
    field = check_samples(field, grid)
    raw = scipy.fft.fft(field, axis=-1, workers=DKPP_THREADS)
    return (grid.dx / SQRT_2PI) * grid.phase * raw


def inverse_transform(coefficients, grid: Grid) -> np.ndarray:
    """
    Transform spectral coefficients back to samples on grid.x.

    Returns:
        np.ndarray: Complex samples; take .real for fields known to be real
    """
    coefficients = check_samples(coefficients, grid, name="spectrum")
    raw = scipy.fft.ifft(grid.phase * coefficients, axis=-1, workers=DKPP_THREADS)
    return (grid.dp * grid.n_points / SQRT_2PI) * raw


def to_real(samples: np.ndarray, tolerance: float = 1e-9) -> np.ndarray:
    """Drop the imaginary part of samples, logging when it is not negligible."""
    scale = 1.0 + float(np.max(np.abs(samples.real), initial=0.0))
    residue = float(np.max(np.abs(samples.imag), initial=0.0))
    if residue > tolerance * scale:
        logger.warning(f"Imaginary residue {residue:.3e} after inverse transform")
    return np.ascontiguousarray(samples.real)


def fractional_symbol(grid: Grid, alpha: float) -> np.ndarray:
    """|p_k|^(2 alpha), the symbol of the fractional Laplacian."""
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    return np.abs(grid.p) ** (2.0 * alpha)


def drift_symbol(grid: Grid, b: float) -> np.ndarray:
    """i b p_k with the Nyquist coefficient zeroed so real fields stay real."""
    symbol = 1j * b * grid.p
    symbol[grid.nyquist_index] = 0.0
    return symbol


def linear_symbol(grid: Grid, alpha: float, a: float, b: float) -> np.ndarray:
    """Full linear symbol m_k = -|p_k|^(2 alpha) + i b p_k + a."""
    return -fractional_symbol(grid, alpha) + drift_symbol(grid, b) + a


def apply_multiplier(field, grid: Grid, multiplier) -> np.ndarray:
    """
    Apply a Fourier multiplier: inverse_transform(multiplier * forward_transform(field)).

    Real input stays real when the multiplier is Hermitian (m(-p) = conj(m(p))).
    """
    field = np.asarray(field)
    out = inverse_transform(multiplier * forward_transform(field, grid), grid)
    if np.isrealobj(field):
        return to_real(out)
    return out


def apply_fractional_laplacian(field, grid: Grid, alpha: float) -> np.ndarray:
    """(-d^2/dx^2)^alpha applied spectrally."""
    return apply_multiplier(field, grid, fractional_symbol(grid, alpha))


def second_derivative(field, grid: Grid) -> np.ndarray:
    return apply_multiplier(field, grid, -grid.p ** 2)


def l2_norm(field, grid: Grid) -> float:
    """L2 norm by rectangle-rule quadrature over the box."""
    field = check_samples(field, grid)
    return float(np.sqrt(grid.dx * np.sum(np.abs(field) ** 2)))


def spectral_l2_norm(coefficients, grid: Grid) -> float:
    """L2 norm from coefficients (Parseval)."""
    return float(np.sqrt(grid.dp * np.sum(np.abs(coefficients) ** 2)))


def l1_norm(field, grid: Grid) -> float:
    """L1 norm by rectangle-rule quadrature."""
    field = check_samples(field, grid)
    return float(grid.dx * np.sum(np.abs(field)))


def h2alpha_norm(field, grid: Grid, alpha: float) -> float:
    """
    Sobolev norm with ||phi||^2 = ||phi||_L2^2 + || |p|^(2 alpha) phi_hat ||^2.

    Args:
        field: Physical samples
        grid (Grid): The grid
        alpha (float): Exponent in (0, 1]; alpha = 1 gives the H^2 norm

    Returns:
        float: The norm
    """
    coefficients = forward_transform(field, grid)
    weighted = fractional_symbol(grid, alpha) * coefficients
    return float(np.sqrt(spectral_l2_norm(coefficients, grid) ** 2 + spectral_l2_norm(weighted, grid) ** 2))


def boundary_ratio(field) -> float:
    """Largest boundary sample relative to the field maximum (wrap-around indicator)."""
    field = np.abs(np.asarray(field))
    peak = float(np.max(field, initial=0.0))
    if peak == 0.0:
        return 0.0
    return float(max(field[..., 0].max(), field[..., -1].max()) / peak)


def warn_if_not_decayed(field, name: str) -> bool:
    """Log a warning when a field is not negligible at +-L; returns True when it warned."""
    ratio = boundary_ratio(field)
    if ratio > BOUNDARY_WARN_RATIO:
        logger.warning(
            f"{name} reaches {ratio:.2e} of its maximum at the box edge; enlarge half_width"
        )
        return True
    return False
