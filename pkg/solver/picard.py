#!/usr/bin/env python3
"""
DKPP Picard Solver Module
Iterates the block map t_{a,b} to its unique fixed point, measures distances in
W^{1,2,2}(R x [0, T]), marches windows forward in time and checks whether the
solution is guaranteed to be nontrivial.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from config import CONTRACTION_SLACK, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE, HORIZON_SAFETY, SUPPORT_THRESHOLD
from errors import DimensionError, NonConvergenceError, ParameterError, RefusalError
from model.problem import (
    ProblemSpec,
    SpaceTimeField,
    TimeWindow,
    finite_difference_time_derivative,
)
from solver.certificate import ContractionCertificate, certify, max_horizon
from solver.duhamel import apply_map, duhamel_residual, time_derivative
from spectral.grid import Grid
from spectral.transform import forward_transform, h2alpha_norm, l2_norm

logger = logging.getLogger(__name__)

# ratios are recorded only above this denominator
RATIO_FLOOR = 1e2 * np.finfo(float).eps


def w122_norm(u: SpaceTimeField, du_dt: SpaceTimeField, grid: Grid, window: TimeWindow) -> float:
    """
    sqrt(||du/dt||^2 + ||d^2u/dx^2||^2 + ||u||^2) over R x [0, T].

    Spatial norms by Parseval, u_xx through the p^2 multiplier, time by trapezoid.
    """
    for f in (u, du_dt):
        if f.grid != grid or f.window != window:
            raise DimensionError("field does not live on the given grid and window")
    u_hat = u.spectra
    per_level = grid.dp * np.sum(
        np.abs(du_dt.spectra) ** 2 + (1.0 + grid.p ** 4) * np.abs(u_hat) ** 2,
        axis=-1,
    )
    return float(np.sqrt(trapezoid(per_level, dx=window.dt)))


def space_time_l2_norm(u: SpaceTimeField) -> float:
    per_level = u.grid.dx * np.sum(u.values ** 2, axis=-1)
    return float(np.sqrt(trapezoid(per_level, dx=u.window.dt)))


@dataclass
class SolveConfig:
    """
    Picard settings.

    Attributes:
        initial_guess: 'extension' (u0 constant in t), 'zero', 'random', or a SpaceTimeField
        allow_uncertified (bool): Iterate even when C >= 1
        slack (float): Discretization slack added to C in the ratio checks
        seed (int): Seed for the 'random' guess
    """

    tolerance: float = DEFAULT_TOLERANCE
    max_iter: int = DEFAULT_MAX_ITER
    initial_guess: Union[str, SpaceTimeField] = "extension"
    allow_uncertified: bool = False
    slack: float = CONTRACTION_SLACK
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass
class SolveReport:
    """Diagnostics of one Picard solve; residuals[n] = ||u^(n+1) - u^(n)||_W."""

    iterations: int
    residuals: list
    ratios: list
    stationarity: float
    converged: bool
    certificate: ContractionCertificate
    norms: dict = field(default_factory=dict)
    duhamel_residual: Optional[float] = None
    nontriviality: Optional[str] = None
    checks: dict = field(default_factory=dict)

    def ratio_bound(self, slack: float = CONTRACTION_SLACK) -> float:
        return self.certificate.constant + slack

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residuals": list(self.residuals),
            "ratios": list(self.ratios),
            "stationarity": self.stationarity,
            "certificate": self.certificate.to_dict(),
            "norms": dict(self.norms),
            "duhamel_residual": self.duhamel_residual,
            "nontriviality": self.nontriviality,
            "checks": dict(self.checks),
        }


def _initial_guess(problem: ProblemSpec, window: TimeWindow, config: SolveConfig):
    guess = config.initial_guess
    grid = problem.grid
    if isinstance(guess, SpaceTimeField):
        if guess.grid != grid or guess.window != window:
            raise DimensionError("initial guess does not live on the problem grid and window")
        return guess, finite_difference_time_derivative(guess)
    if guess == "extension":
        field0 = SpaceTimeField.constant_extension(problem.u0, grid, window)
        return field0, SpaceTimeField.zeros(grid, window)
    if guess == "zero":
        return SpaceTimeField.zeros(grid, window), SpaceTimeField.zeros(grid, window)
    if guess == "random":
        rng = np.random.default_rng(config.seed)
        field0 = SpaceTimeField(rng.uniform(-1.0, 1.0, (window.steps + 1, grid.n_points)), grid, window)
        return field0, finite_difference_time_derivative(field0)
    raise ParameterError(f"unknown initial guess {guess!r}")


def _ratios(sequence) -> list:
    return [
        float(sequence[n] / sequence[n - 1])
        for n in range(1, len(sequence))
        if sequence[n - 1] > RATIO_FLOOR
    ]


def field_norms(problem: ProblemSpec, u: SpaceTimeField, du_dt: SpaceTimeField) -> dict:
    """Final-level L2 and H^{2 alpha} norms plus the W^{1,2,2} norm of the whole field."""
    grid = problem.grid
    return {
        "l2": l2_norm(u.final, grid),
        "h2alpha": h2alpha_norm(u.final, grid, problem.alpha),
        "w122": w122_norm(u, du_dt, grid, u.window),
    }


def solve(problem: ProblemSpec, window: TimeWindow, config: Optional[SolveConfig] = None):
    """
    Picard iteration u^(n+1) = t_{a,b} u^(n) until ||u^(n+1) - u^(n)||_W < tolerance.

    The accepted field is u^(n); the final map application only confirms
    stationarity, so a map that is constant in v reports one iteration.

    Returns:
        tuple: (SolveReport, SpaceTimeField)

    Raises:
        RefusalError: If the certificate is inadmissible and config.allow_uncertified is False
        NonConvergenceError: If max_iter applications do not reach the tolerance
    """
    config = config or SolveConfig()
    certificate = certify(problem, window)
    if not certificate.admissible:
        if not config.allow_uncertified:
            raise RefusalError(
                f"contraction constant C = {certificate.constant:.6g} >= 1 on T = {window.horizon}; "
                "pass allow_uncertified to iterate anyway",
                certificate,
            )
        logger.warning(f"Iterating without a contraction certificate (C = {certificate.constant:.6g})")

    current, current_dt = _initial_guess(problem, window, config)
    residuals = []
    for application in range(1, config.max_iter + 1):
        image = apply_map(problem, window, current)
        image_dt = time_derivative(problem, window, image, current)
        residual = w122_norm(image - current, image_dt - current_dt, problem.grid, window)
        logger.debug(f"Picard application {application}: residual {residual:.3e}")

        if residual < config.tolerance:
            sequence = residuals + [residual]
            report = SolveReport(
                iterations=len(residuals),
                residuals=residuals,
                ratios=_ratios(sequence),
                stationarity=residual,
                converged=True,
                certificate=certificate,
                norms=field_norms(problem, current, current_dt),
            )
            logger.info(f"Picard converged after {report.iterations} iterations (C = {certificate.constant:.4g})")
            return report, current

        residuals.append(residual)
        current, current_dt = image, image_dt

    raise NonConvergenceError(
        f"Picard iteration did not reach {config.tolerance:g} in {config.max_iter} applications",
        residuals,
        _ratios(residuals),
        last_iterate=current,
    )


def iteration_bound(tolerance: float, first_residual: float, ratio: float) -> int:
    """ceil(log(tol / r0) / log(ratio)) + 2, the geometric-decay iteration budget."""
    if first_residual <= tolerance:
        return 2
    return int(math.ceil(math.log(tolerance / first_residual) / math.log(ratio))) + 2


def contraction_ratio(
    problem: ProblemSpec,
    window: TimeWindow,
    v1: SpaceTimeField,
    v1_dt: SpaceTimeField,
    v2: SpaceTimeField,
    v2_dt: SpaceTimeField,
):
    """
    Measured ||t v1 - t v2||_W / ||v1 - v2||_W, and the same numerator over ||v1 - v2||_L2.

    Returns:
        tuple: (ratio in W^{1,2,2}, ratio against the L2(R x [0, T]) denominator)
    """
    u1 = apply_map(problem, window, v1)
    u2 = apply_map(problem, window, v2)
    u1_dt = time_derivative(problem, window, u1, v1)
    u2_dt = time_derivative(problem, window, u2, v2)
    numerator = w122_norm(u1 - u2, u1_dt - u2_dt, problem.grid, window)
    difference = v1 - v2
    return (
        numerator / w122_norm(difference, v1_dt - v2_dt, problem.grid, window),
        numerator / space_time_l2_norm(difference),
    )


@dataclass
class MarchResult:
    windows: list
    reports: list
    seam_jumps: list
    start_times: list

    @property
    def final(self) -> np.ndarray:
        return self.windows[-1].final


def march_global(
    problem: ProblemSpec,
    step_horizon: float,
    total_time: float,
    steps_per_window: int,
    config: Optional[SolveConfig] = None,
) -> MarchResult:
    """
    Solves on consecutive windows of length step_horizon, each starting from the
    previous window's final level. A shorter last window covers the remainder.

    Raises:
        ParameterError: If step_horizon exceeds the safety fraction of T_max or total_time < step_horizon
        NonConvergenceError: From an inner solve, tagged with the window index
    """
    config = config or SolveConfig()
    horizon = max_horizon(problem)
    if step_horizon > HORIZON_SAFETY * horizon.t_max and not config.allow_uncertified:
        raise ParameterError(
            f"step {step_horizon:g} exceeds {HORIZON_SAFETY} * T_max = {HORIZON_SAFETY * horizon.t_max:.6g}; "
            f"{horizon.explanation}"
        )
    if total_time < step_horizon:
        raise ParameterError(f"total_time {total_time:g} is shorter than the window {step_horizon:g}")

    count = max(1, math.ceil(total_time / step_horizon - 1e-9))
    dt = step_horizon / steps_per_window
    windows, reports, seam_jumps, start_times = [], [], [], []
    current = problem
    start = 0.0
    for index in range(count):
        length = min(step_horizon, total_time - start) if index == count - 1 else step_horizon
        steps = steps_per_window if length == step_horizon else max(1, math.ceil(length / dt - 1e-9))
        window = TimeWindow(length, steps)
        try:
            report, solution = solve(current, window, config)
        except NonConvergenceError as e:
            e.window_index = index
            raise
        if windows:
            seam_jumps.append(l2_norm(solution.level(0) - windows[-1].final, problem.grid))
        windows.append(solution)
        reports.append(report)
        start_times.append(start)
        logger.info(f"Window {index + 1}/{count} done: t in [{start:.6g}, {start + length:.6g}]")
        start += length
        current = current.with_initial(solution.final)
    return MarchResult(windows=windows, reports=reports, seam_jumps=seam_jumps, start_times=start_times)


class Nontriviality(str, enum.Enum):
    GUARANTEED = "nontrivial_guaranteed"
    INCONCLUSIVE = "inconclusive"


def _support(spectrum: np.ndarray) -> np.ndarray:
    magnitude = np.abs(spectrum)
    peak = magnitude.max(initial=0.0)
    if peak == 0.0:
        return np.zeros(magnitude.shape, dtype=bool)
    return magnitude > SUPPORT_THRESHOLD * peak


def longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for inside in mask:
        run = run + 1 if inside else 0
        best = max(best, run)
    return best


def check_nontriviality(problem: ProblemSpec) -> Nontriviality:
    """
    Guaranteed nontrivial when supp F_hat(0, .) and supp G_hat overlap on at
    least two adjacent modes, the grid stand-in for a set of positive measure.
    """
    grid = problem.grid
    baseline = forward_transform(problem.nonlinearity.baseline, grid)
    overlap = _support(baseline) & _support(problem.kernel.spectrum)
    # contiguity is judged in increasing frequency order
    run = longest_run(np.fft.fftshift(overlap))
    verdict = Nontriviality.GUARANTEED if run >= 2 else Nontriviality.INCONCLUSIVE
    logger.info(f"Support overlap: {int(overlap.sum())} modes, longest run {run} -> {verdict.value}")
    return verdict


def verify_solution(problem: ProblemSpec, window: TimeWindow, report: SolveReport, u: SpaceTimeField, slack: float):
    """Adds the Duhamel residual and the ratio check to a report."""
    report.duhamel_residual = duhamel_residual(problem, window, u, u)
    bound = report.ratio_bound(slack)
    report.checks["ratios_within_bound"] = all(r <= bound for r in report.ratios)
    report.checks["ratio_bound"] = bound
    return report
