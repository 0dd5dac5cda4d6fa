#!/usr/bin/env python3
"""
DKPP Profiles Module
Fixed spatial profiles: tabulated CSV input, Gaussians, band-limited bumps,
and the built-in initial conditions.
"""

from pathlib import Path

import numpy as np

from errors import ConfigError, DataError, DimensionError, ParameterError
from spectral.grid import Grid
from spectral.transform import SQRT_2PI, inverse_transform, to_real


def load_profile_csv(path, grid: Grid) -> np.ndarray:
    """
    Loads a two-column CSV (x, value) sampled on the grid.

    Args:
        path: CSV file with one row per grid point, '#' comments allowed
        grid (Grid): Grid the samples must match

    Returns:
        np.ndarray: The value column

    Raises:
        FileNotFoundError: If the file does not exist
        DimensionError: If the shape or the x column does not match the grid
        DataError: If any value is not finite
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Profile file not found: {path}")

    try:
        table = np.loadtxt(path, delimiter=",", dtype=np.float64, comments="#", ndmin=2)
    except ValueError as e:
        raise DataError(f"Could not parse {path} as two-column decimal CSV: {e}") from e

    if table.shape != (grid.n_points, 2):
        raise DimensionError(
            f"{path} has shape {table.shape}, expected ({grid.n_points}, 2)"
        )
    if not np.all(np.isfinite(table)):
        raise DataError(f"{path} contains non-finite entries")
    if not np.allclose(table[:, 0], grid.x, rtol=0.0, atol=1e-9 * grid.half_width):
        raise DimensionError(f"x column of {path} does not match the grid points")

    return table[:, 1].copy()


def gaussian_profile(grid: Grid, amplitude: float = 1.0, sigma: float = 1.0) -> np.ndarray:
    """amplitude * exp(-x^2 / (2 sigma^2))"""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    return amplitude * np.exp(-grid.x ** 2 / (2.0 * sigma ** 2))


def band_limited_profile(grid: Grid, amplitude: float, p_low: float, p_high: float) -> np.ndarray:
    """
    Real profile whose spectrum is amplitude * sin^2 taper on p_low <= |p| <= p_high
    and exactly zero elsewhere on the grid.
    """
    p_max = grid.dp * (grid.n_points // 2 - 1)
    if not 0.0 <= p_low < p_high <= p_max:
        raise ParameterError(
            f"band [{p_low}, {p_high}] must satisfy 0 <= p_low < p_high <= {p_max:.6g}"
        )
    magnitude = np.abs(grid.p)
    inside = (magnitude >= p_low) & (magnitude <= p_high)
    taper = np.sin(np.pi * (magnitude - p_low) / (p_high - p_low)) ** 2
    spectrum = np.where(inside, amplitude * taper / SQRT_2PI, 0.0)
    spectrum[grid.nyquist_index] = 0.0
    return to_real(inverse_transform(spectrum.astype(complex), grid))


def build_profile(descriptor: dict, grid: Grid) -> np.ndarray:
    """
    Builds a spatial profile from a config descriptor.

    Supported kinds: gaussian(amplitude, sigma), band_limited(amplitude, p_low, p_high),
    sine(mode, amplitude), tabulated(path), zero.

    Raises:
        ConfigError: If the kind is unknown
    """
    kind = descriptor.get("kind")
    if kind == "gaussian":
        return gaussian_profile(grid, descriptor.get("amplitude", 1.0), descriptor.get("sigma", 1.0))
    if kind == "band_limited":
        return band_limited_profile(
            grid, descriptor.get("amplitude", 1.0), descriptor["p_low"], descriptor["p_high"]
        )
    if kind == "sine":
        mode = int(descriptor.get("mode", 1))
        return descriptor.get("amplitude", 1.0) * np.sin(mode * grid.dp * grid.x)
    if kind == "tabulated":
        return load_profile_csv(descriptor["path"], grid)
    if kind == "zero":
        return np.zeros(grid.n_points)
    raise ConfigError([f"unknown profile kind: {kind!r}"])
