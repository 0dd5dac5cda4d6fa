#!/usr/bin/env python3
"""
DKPP Nonlinearity Module
The proliferation rate F(u, x), required to satisfy
    |F(u, x)| <= k |u| + h(x),   |F(u1, x) - F(u2, x)| <= l |u1 - u2|.
Built-in rates are base(u) + s(x) with a fixed source profile s and growth
offset h = |s|. Measurability in x (the Caratheodory condition) cannot be
checked numerically and is assumed for custom evaluators.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from config import MIN_VERIFY_SAMPLES, VERIFY_SAMPLES, VERIFY_U_RANGE
from errors import AssumptionViolation, ConfigError, DataError, ParameterError
from model.profiles import build_profile
from spectral.grid import Grid
from spectral.transform import check_samples, forward_transform, l2_norm

logger = logging.getLogger(__name__)

# relative slack for roundoff in difference quotients
QUOTIENT_SLACK = 1e-9

BASE_RATES = {
    "linear": lambda u, c: c * u,
    "saturating": lambda u, c: c * u / (1.0 + u * u),
    "sine": lambda u, c: c * np.sin(u),
    "quadratic": lambda u, c: c * u * u,
    "zero": lambda u, c: np.zeros_like(u),
}


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """
    Immutable description of F on a grid.

    Attributes:
        kind (str): Built-in base rate or 'custom'
        grid (Grid): Grid the source is sampled on
        growth_k (float): k in |F| <= k|u| + h
        lipschitz_l (float): Declared l
        coefficient (float): c of the built-in base rate
        source (np.ndarray): s(x_j), added to the base rate
        growth_offset (np.ndarray): h(x_j) >= 0
        evaluator (Callable): F(u, j) with j grid indices, vectorized
    """

    kind: str
    grid: Grid
    growth_k: float
    lipschitz_l: float
    coefficient: float
    source: np.ndarray
    growth_offset: np.ndarray
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    notes: list = field(default_factory=list)

    @property
    def baseline(self) -> np.ndarray:
        """F(0, x_j)."""
        return evaluate(self, np.zeros(self.grid.n_points), self.grid)

    @property
    def baseline_spectrum(self) -> np.ndarray:
        return forward_transform(self.baseline, self.grid)

    @property
    def is_linear(self) -> bool:
        return self.kind in ("linear", "zero")

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "coefficient": self.coefficient,
            "k": self.growth_k,
            "l": self.lipschitz_l,
            "h_l2": l2_norm(self.growth_offset, self.grid),
            "notes": list(self.notes),
        }


@dataclass
class GrowthReport:
    """Outcome of the |F(u, x)| <= k|u| + h(x) sweep."""

    passed: bool
    samples: int
    worst_excess: float
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "worst_excess": self.worst_excess,
            "witness": self.witness,
        }


def build_nonlinearity(
    kind: str,
    grid: Grid,
    coefficient: float = 0.0,
    growth_k: Optional[float] = None,
    lipschitz_l: Optional[float] = None,
    source: Optional[np.ndarray] = None,
    custom: Optional[Callable] = None,
    growth_offset: Optional[np.ndarray] = None,
) -> NonlinearitySpec:
    """
    Builds a nonlinearity spec.

    Built-in kinds derive k = l = |coefficient| unless given. A 'custom' kind wraps
    a vectorized callable F(u, x) and must declare k, l and h itself.

    Raises:
        ConfigError: If the kind is unknown or a custom rate lacks declared constants
        ParameterError: If a declared constant is negative
    """
    n = grid.n_points
    source = np.zeros(n) if source is None else check_samples(np.asarray(source, dtype=float), grid, "source")
    notes = []

    if kind == "custom":
        if custom is None or growth_k is None or lipschitz_l is None:
            raise ConfigError(["nonlinearity: custom rates need an evaluator plus declared k and l"])
        x = grid.x

        def evaluator(u, j):
            return np.asarray(custom(u, x[j]), dtype=float)

        offset = np.zeros(n) if growth_offset is None else np.asarray(growth_offset, dtype=float)
        notes.append("Caratheodory condition assumed for custom evaluator")
    elif kind in BASE_RATES:
        base = BASE_RATES[kind]
        c = float(coefficient)

        def evaluator(u, j):
            return base(u, c) + source[j]

        offset = np.abs(source) if growth_offset is None else np.asarray(growth_offset, dtype=float)
        if growth_k is None:
            if kind == "quadratic":
                raise ConfigError(["nonlinearity.k: quadratic rates need a declared growth constant"])
            growth_k = abs(c)
        if lipschitz_l is None:
            if kind == "quadratic":
                raise ConfigError(["nonlinearity.l: quadratic rates need a declared Lipschitz constant"])
            lipschitz_l = abs(c)
    else:
        raise ConfigError([f"nonlinearity.kind: unknown rate {kind!r}"])

    if growth_k < 0 or lipschitz_l < 0:
        raise ParameterError(f"growth k and Lipschitz l must be nonnegative, got k={growth_k}, l={lipschitz_l}")
    offset = check_samples(offset, grid, "growth offset h")
    if np.any(offset < 0):
        raise ParameterError("growth offset h must be nonnegative")

    return NonlinearitySpec(
        kind=kind,
        grid=grid,
        growth_k=float(growth_k),
        lipschitz_l=float(lipschitz_l),
        coefficient=float(coefficient),
        source=source,
        growth_offset=offset,
        evaluator=evaluator,
        notes=notes,
    )


def nonlinearity_from_descriptor(descriptor: dict, grid: Grid) -> NonlinearitySpec:
    source = descriptor.get("source")
    return build_nonlinearity(
        descriptor.get("kind"),
        grid,
        coefficient=descriptor.get("c", 0.0),
        growth_k=descriptor.get("k"),
        lipschitz_l=descriptor.get("l"),
        source=None if source is None else build_profile(source, grid),
    )


def evaluate(spec: NonlinearitySpec, field, grid: Grid) -> np.ndarray:
    """
    Pointwise F(u(x_j), x_j); a 2-D field is evaluated level by level.

    Raises:
        DataError: If F produces NaN or Inf, naming the first offending x_j
    """
    field = check_samples(field, grid)
    j = np.broadcast_to(np.arange(grid.n_points), field.shape)
    out = spec.evaluator(field, j)
    bad = ~np.isfinite(out)
    if np.any(bad):
        index = np.argwhere(bad)[0]
        raise DataError(f"F produced a non-finite value at x = {grid.x[index[-1]]:.6g}")
    return out


def _sweep(dimensions: int, samples: int, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=dimensions, scramble=True, seed=seed)
    return sampler.random(samples)


def _check_sweep_args(u_range, samples):
    lo, hi = float(u_range[0]), float(u_range[1])
    if not hi > lo:
        raise ParameterError(f"u_range must be nondegenerate, got {u_range}")
    if samples < MIN_VERIFY_SAMPLES:
        raise ParameterError(f"samples must be at least {MIN_VERIFY_SAMPLES}, got {samples}")
    return lo, hi


def estimate_lipschitz(
    spec: NonlinearitySpec,
    u_range=VERIFY_U_RANGE,
    samples: int = VERIFY_SAMPLES,
    seed: int = 0,
) -> float:
    """
    Estimates l as the largest sampled difference quotient.

    Triples (u1, u2, x) come from a scrambled Sobol sequence; the gap
    |u1 - u2| is log-uniform between 1e-4 and 1 times the range width, so
    both local slopes and long chords are probed. Both points stay in u_range.

    Returns:
        float: The estimate, never above the declared l

    Raises:
        AssumptionViolation: If a quotient exceeds the declared l, with the witness triple
    """
    lo, hi = _check_sweep_args(u_range, samples)
    width = hi - lo
    points = _sweep(4, samples, seed)
    u1 = lo + width * points[:, 0]
    gap = width * 10.0 ** (-4.0 + 4.0 * points[:, 1])
    u2 = np.where(points[:, 2] < 0.5, u1 + gap, u1 - gap)
    u2 = np.where((u2 > hi) | (u2 < lo), 2.0 * u1 - u2, u2)
    # flipped partners can still overshoot when the gap exceeds both margins
    u2 = np.clip(u2, lo, hi)
    j = np.minimum((points[:, 3] * spec.grid.n_points).astype(np.int64), spec.grid.n_points - 1)

    quotients = np.abs(spec.evaluator(u1, j) - spec.evaluator(u2, j)) / np.abs(u1 - u2)
    worst = int(np.argmax(quotients))
    estimate = float(quotients[worst])

    if estimate > spec.lipschitz_l * (1.0 + QUOTIENT_SLACK) + 1e-12:
        raise AssumptionViolation(
            f"Lipschitz bound: difference quotient {estimate:.6g} exceeds declared l = {spec.lipschitz_l:.6g}",
            {"u1": float(u1[worst]), "u2": float(u2[worst]), "x": float(spec.grid.x[j[worst]])},
        )
    logger.debug(f"Lipschitz estimate {estimate:.6g} (declared {spec.lipschitz_l:.6g})")
    return estimate


def verify_growth(
    spec: NonlinearitySpec,
    u_range=VERIFY_U_RANGE,
    samples: int = VERIFY_SAMPLES,
    seed: int = 0,
) -> GrowthReport:
    """
    Checks |F(u, x)| <= k|u| + h(x) over a Sobol sweep of (u, x).

    Returns:
        GrowthReport: Pass/fail with the worst witness on failure
    """
    lo, hi = _check_sweep_args(u_range, samples)
    points = _sweep(2, samples, seed)
    u = lo + (hi - lo) * points[:, 0]
    # the range ends are where sublinear growth is most likely to fail
    u = np.concatenate([u, [lo, hi]])
    j = np.minimum((points[:, 1] * spec.grid.n_points).astype(np.int64), spec.grid.n_points - 1)
    j = np.concatenate([j, [int(np.argmin(spec.growth_offset))] * 2])

    bound = spec.growth_k * np.abs(u) + spec.growth_offset[j]
    excess = np.abs(spec.evaluator(u, j)) - bound
    tolerance = QUOTIENT_SLACK * (1.0 + bound)
    worst = int(np.argmax(excess - tolerance))
    passed = bool(excess[worst] <= tolerance[worst])

    witness = None
    if not passed:
        witness = {"u": float(u[worst]), "x": float(spec.grid.x[j[worst]]), "excess": float(excess[worst])}
        logger.warning(f"Growth bound fails at u = {u[worst]:.6g}, x = {spec.grid.x[j[worst]]:.6g}")
    return GrowthReport(passed=passed, samples=len(u), worst_excess=float(excess[worst]), witness=witness)
