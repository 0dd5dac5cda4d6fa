#!/usr/bin/env python3
"""
DKPP Kernel Module
Admissible convolution kernels: G and G'' in L1, G nontrivial.
Builds the sampled kernel, its second derivative, both L1 norms, the coupling
quantity Q = sqrt(||G||_1^2 + ||G''||_1^2) and the spectral image G_hat.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from config import QUADRATURE_RTOL
from errors import AdmissibilityError, ConfigError, DimensionError, ParameterError
from model.profiles import load_profile_csv
from spectral.grid import Grid
from spectral.transform import (
    SQRT_2PI,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    to_real,
    warn_if_not_decayed,
)

logger = logging.getLogger(__name__)

KERNEL_KINDS = ("gaussian", "bump", "sinc_squared", "laplace", "tabulated")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Immutable kernel data on a grid."""

    kind: str
    params: dict
    grid: Grid
    values: np.ndarray
    second_derivative: np.ndarray
    l1_g: float
    l1_g2: float
    spectrum: np.ndarray
    nonnegative: bool = True
    notes: list = field(default_factory=list)

    @property
    def q(self) -> float:
        return float(np.hypot(self.l1_g, self.l1_g2))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "params": {k: v for k, v in self.params.items() if k != "values"},
            "l1_G": self.l1_g,
            "l1_G2": self.l1_g2,
            "Q": self.q,
            "nonnegative": self.nonnegative,
            "notes": list(self.notes),
        }


def l1_adaptive(func, breakpoints, rtol: float = QUADRATURE_RTOL, start: int = 64, max_level: int = 18) -> float:
    """
    L1 norm of an analytic function by composite Simpson with dyadic refinement.

    Args:
        func: Vectorized callable
        breakpoints: Sorted segment ends; |func| should be smooth on each segment
        rtol (float): Relative change at which a segment is accepted

    Returns:
        float: Sum of the segment integrals of |func|
    """
    total = 0.0
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        if hi <= lo:
            continue
        n = start
        previous = None
        for _ in range(max_level):
            xs = np.linspace(lo, hi, n + 1)
            value = float(simpson(np.abs(func(xs)), x=xs))
            if previous is not None and abs(value - previous) <= rtol * abs(value) + 1e-300:
                break
            previous = value
            n *= 2
        else:
            logger.warning(f"L1 quadrature on [{lo:.4g}, {hi:.4g}] stopped before rtol {rtol:g}")
        total += value
    return total


def _refined_samples(spectrum: np.ndarray, grid: Grid, factor: int) -> np.ndarray:
    """Band-limited interpolant of a spectrum on a grid `factor` times finer."""
    if factor == 1:
        return to_real(inverse_transform(spectrum, grid))
    fine = Grid(grid.half_width, grid.n_points * factor)
    padded = np.zeros(fine.n_points, dtype=complex)
    k = grid.k
    padded[k % fine.n_points] = spectrum
    # split the Nyquist coefficient so the interpolant stays real
    nyquist = spectrum[grid.nyquist_index]
    padded[(-grid.n_points // 2) % fine.n_points] = 0.5 * nyquist
    padded[(grid.n_points // 2) % fine.n_points] = 0.5 * nyquist
    return to_real(inverse_transform(padded, fine))


def _periodic_abs_integral(samples: np.ndarray, h: float) -> float:
    """Integral of |piecewise-linear interpolant| over one period, exact at sign changes."""
    a = samples
    b = np.roll(samples, -1)
    same_sign = a * b >= 0
    plain = 0.5 * h * (np.abs(a) + np.abs(b))
    denom = np.where(same_sign, 1.0, np.abs(a) + np.abs(b))
    crossing = 0.5 * h * (a ** 2 + b ** 2) / denom
    return float(np.sum(np.where(same_sign, plain, crossing)))


def l1_spectral(spectrum: np.ndarray, grid: Grid, rtol: float = QUADRATURE_RTOL, max_level: int = 8) -> float:
    """L1 norm of the band-limited field with the given spectrum, refined dyadically."""
    previous = None
    for level in range(max_level + 1):
        factor = 2 ** level
        samples = _refined_samples(spectrum, grid, factor)
        value = _periodic_abs_integral(samples, grid.dx / factor)
        if previous is not None and abs(value - previous) <= rtol * abs(value) + 1e-300:
            return value
        previous = value
    logger.warning(f"Spectral L1 quadrature stopped at refinement {2 ** max_level} before rtol {rtol:g}")
    return value


def gaussian_l1_second_derivative(sigma: float) -> float:
    """Closed form of ||G''||_1 for the unit-mass Gaussian of width sigma."""
    return 4.0 * np.exp(-0.5) / (sigma ** 2 * SQRT_2PI)


def passes_tail_test(spectrum: np.ndarray, grid: Grid) -> bool:
    """
    Smoothness surrogate for G'' in L1: |c_k| |k|^3 must peak below the upper quarter band.

    Coefficients under roundoff (1e-14 of the maximum) are ignored.
    """
    magnitude = np.abs(spectrum)
    peak = magnitude.max()
    if peak == 0.0:
        return False
    k = np.abs(grid.k)
    weighted = np.where(magnitude > 1e-14 * peak, magnitude * k.astype(float) ** 3, 0.0)
    low = weighted[(k >= 1) & (k < grid.n_points // 4)]
    high = weighted[k >= grid.n_points // 4]
    return float(high.max(initial=0.0)) < float(low.max(initial=0.0))


def _gaussian(grid: Grid, params: dict, amplitude: float):
    sigma = float(params.get("sigma", 1.0))
    if sigma <= 0:
        raise ParameterError(f"gaussian kernel needs sigma > 0, got {sigma}")

    def g(x):
        return amplitude * np.exp(-x ** 2 / (2 * sigma ** 2)) / (sigma * SQRT_2PI)

    def g2(x):
        return g(x) * (x ** 2 / sigma ** 4 - 1.0 / sigma ** 2)

    L = grid.half_width
    cuts = [-L] + [c for c in (-sigma, sigma) if -L < c < L] + [L]
    l1_g = abs(amplitude)
    l1_g2 = abs(amplitude) * gaussian_l1_second_derivative(sigma)

    for label, closed, func in (("||G||_1", l1_g, g), ("||G''||_1", l1_g2, g2)):
        quadrature = l1_adaptive(func, cuts)
        if abs(quadrature - closed) > 1e-6 * closed:
            logger.warning(f"{label}: closed form {closed:.10g} vs quadrature {quadrature:.10g} on the box")

    return g(grid.x), g2(grid.x), l1_g, l1_g2


def _bump(grid: Grid, params: dict, amplitude: float):
    width = float(params.get("width", 1.0))
    if not 0 < width < grid.half_width:
        raise ParameterError(f"bump kernel needs 0 < width < half_width, got {width}")

    def g(x):
        s = np.asarray(x, dtype=float) / width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return amplitude * out

    def g2(x):
        s = np.asarray(x, dtype=float) / width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        one_minus = 1.0 - si ** 2
        with np.errstate(over="ignore", invalid="ignore"):
            value = np.exp(-1.0 / one_minus) * (6.0 * si ** 4 - 2.0) / one_minus ** 4
        out[inside] = np.nan_to_num(value, nan=0.0, posinf=0.0, neginf=0.0)
        return amplitude * out / width ** 2

    turn = width * 3.0 ** -0.25
    l1_g = l1_adaptive(g, [-width, width])
    l1_g2 = l1_adaptive(g2, [-width, -turn, turn, width])
    return g(grid.x), g2(grid.x), l1_g, l1_g2


def _sinc_squared(grid: Grid, params: dict, amplitude: float):
    bandwidth = float(params.get("bandwidth", 1.0))
    p_max = grid.dp * (grid.n_points // 2 - 1)
    if not 0 < bandwidth < p_max:
        raise ParameterError(f"sinc_squared kernel needs 0 < bandwidth < {p_max:.6g}, got {bandwidth}")

    spectrum = amplitude * np.clip(1.0 - np.abs(grid.p) / bandwidth, 0.0, None) / SQRT_2PI
    spectrum = spectrum.astype(complex)
    second = -grid.p ** 2 * spectrum
    values = to_real(inverse_transform(spectrum, grid))
    g2 = to_real(inverse_transform(second, grid))
    return values, g2, l1_spectral(spectrum, grid), l1_spectral(second, grid), spectrum


def _tabulated(grid: Grid, params: dict, amplitude: float):
    if "values" in params:
        values = np.asarray(params["values"], dtype=float)
        if values.shape != (grid.n_points,):
            raise DimensionError(f"tabulated kernel needs {grid.n_points} values, got {values.shape}")
    elif "path" in params:
        values = load_profile_csv(params["path"], grid)
    else:
        raise ConfigError(["kernel.path: tabulated kernels need a CSV path"])
    values = amplitude * values

    spectrum = forward_transform(values, grid)
    if not passes_tail_test(spectrum, grid):
        raise AdmissibilityError(
            "kernel admissibility: tabulated kernel spectrum decays slower than |k|^-3; "
            "G'' is not classically integrable"
        )
    g2 = apply_multiplier(values, grid, -grid.p ** 2)
    second = -grid.p ** 2 * spectrum
    return values, g2, l1_spectral(spectrum, grid), l1_spectral(second, grid), spectrum


def build_kernel(kind: str, params: dict, grid: Grid) -> KernelSpec:
    """
    Builds a kernel and all its derived quantities.

    Args:
        kind (str): One of gaussian, bump, sinc_squared, laplace, tabulated
        params (dict): Kind parameters; every kind accepts 'amplitude' (default 1)
        grid (Grid): Grid to sample on

    Returns:
        KernelSpec: The populated kernel

    Raises:
        AdmissibilityError: If G is identically zero or G'' is not in L1
        ParameterError: If a parameter is out of range
    """
    params = dict(params or {})
    amplitude = float(params.get("amplitude", 1.0))

    if kind == "laplace":
        raise AdmissibilityError(
            "kernel admissibility: the Laplace kernel exp(-|x|)/2 has a point mass in G'' "
            "at x = 0, so G'' is not in L1"
        )
    if kind not in KERNEL_KINDS:
        raise ConfigError([f"kernel.kind: unknown kernel {kind!r}, expected one of {KERNEL_KINDS}"])
    if not np.isfinite(amplitude) or amplitude == 0.0:
        raise AdmissibilityError("kernel admissibility: kernel is identically zero")

    if kind == "gaussian":
        values, g2, l1_g, l1_g2 = _gaussian(grid, params, amplitude)
        spectrum = forward_transform(values, grid)
    elif kind == "bump":
        values, g2, l1_g, l1_g2 = _bump(grid, params, amplitude)
        spectrum = forward_transform(values, grid)
    elif kind == "sinc_squared":
        values, g2, l1_g, l1_g2, spectrum = _sinc_squared(grid, params, amplitude)
    else:
        values, g2, l1_g, l1_g2, spectrum = _tabulated(grid, params, amplitude)

    if not l1_g > 0.0:
        raise AdmissibilityError("kernel admissibility: kernel is identically zero")
    if not (np.isfinite(l1_g) and np.isfinite(l1_g2)):
        raise AdmissibilityError("kernel admissibility: kernel L1 norms are not finite")

    notes = []
    scale = float(np.max(np.abs(values)))
    nonnegative = bool(values.min() >= -1e-14 * scale)
    if not nonnegative:
        notes.append("negative mass: G takes negative values")
        logger.warning(f"Kernel {kind} takes negative values (min {values.min():.3e})")
    if kind != "sinc_squared" and warn_if_not_decayed(values, f"kernel {kind}"):
        notes.append("kernel not decayed at the box edge")

    return KernelSpec(
        kind=kind,
        params=params,
        grid=grid,
        values=values,
        second_derivative=g2,
        l1_g=float(l1_g),
        l1_g2=float(l1_g2),
        spectrum=spectrum,
        nonnegative=nonnegative,
        notes=notes,
    )


def kernel_from_descriptor(descriptor: dict, grid: Grid) -> KernelSpec:
    descriptor = dict(descriptor)
    kind = descriptor.pop("kind", None)
    return build_kernel(kind, descriptor, grid)


def convolve(kernel: KernelSpec, field, grid: Grid) -> np.ndarray:
    """
    Integral of G(x - y) f(y) dy computed as inverse_transform(sqrt(2 pi) G_hat f_hat).

    Raises:
        DimensionError: If the kernel lives on a different grid
    """
    if kernel.grid != grid:
        raise DimensionError(f"kernel grid {kernel.grid} differs from field grid {grid}")
    return apply_multiplier(field, grid, SQRT_2PI * kernel.spectrum)
