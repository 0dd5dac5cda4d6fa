#!/usr/bin/env python3
"""
DKPP Studies Module
Parameter sweeps behind `dkpp.py study`: time-step order, spatial resolution,
Picard residual decay and measured contraction ratios.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from errors import ParameterError
from model.problem import ProblemSpec, TimeWindow, random_smooth_field
from runner.run_config import build_problem
from solver.certificate import certify
from solver.picard import SolveConfig, contraction_ratio, solve
from spectral.transform import forward_transform, l2_norm

logger = logging.getLogger(__name__)

STUDY_MODES = ("dt", "N", "picard", "contraction")
CONTRACTION_PAIRS = 20


@dataclass
class StudyTable:
    """Rows for the CSV table plus a summary for the JSON sidecar."""

    mode: str
    header: tuple
    rows: list
    summary: dict = field(default_factory=dict)


def _final_level(problem: ProblemSpec, window: TimeWindow, config: SolveConfig) -> np.ndarray:
    _, solution = solve(problem, window, config)
    return solution.final


def dt_study(problem: ProblemSpec, window: TimeWindow, config: SolveConfig, refinements: int = 3) -> StudyTable:
    """
    Solves at M, 2M, 4M, ... steps and fits the order from successive
    differences of the final level: order = log2(e_h / e_{h/2}).
    """
    if refinements < 3:
        raise ParameterError("a dt study needs at least three resolutions")
    steps = [window.steps * 2 ** r for r in range(refinements)]
    finals = [_final_level(problem, TimeWindow(window.horizon, m), config) for m in steps]
    differences = [l2_norm(finals[r] - finals[r + 1], problem.grid) for r in range(refinements - 1)]

    rows = []
    orders = []
    for r, m in enumerate(steps):
        difference = differences[r] if r < len(differences) else None
        order = None
        if 0 < r < len(differences) and differences[r] > 0:
            order = math.log2(differences[r - 1] / differences[r])
            orders.append(order)
        rows.append((m, window.horizon / m, difference, order))
    fitted = orders[-1] if orders else float("nan")
    logger.info(f"dt study: observed order {fitted:.4f}")
    return StudyTable("dt", ("steps", "dt", "difference_to_next", "order"), rows, {"order": fitted})


def n_study(run_config, window: TimeWindow, config: SolveConfig, levels: int = 3) -> StudyTable:
    """
    Solves on N, N/2, N/4 points over the same box and tabulates the spectral
    tail of the final level plus its distance to the finest run on shared points.
    """
    n_finest = run_config.n_points
    sizes = [n_finest // 2 ** r for r in reversed(range(levels))]
    if sizes[0] < 8:
        raise ParameterError(f"N = {n_finest} is too small for {levels} resolution levels")

    finals = {}
    for n in sizes:
        coarse = build_problem(replace(run_config, n_points=n))
        finals[n] = (coarse.grid, _final_level(coarse, window, config))

    _, finest = finals[n_finest]
    rows = []
    for n in sizes:
        grid, final = finals[n]
        spectrum = np.abs(forward_transform(final, grid))
        peak = float(spectrum.max(initial=0.0))
        tail = float(spectrum[np.abs(grid.k) >= n // 4].max(initial=0.0))
        stride = n_finest // n
        distance = float(np.sqrt(grid.dx * np.sum((final - finest[::stride]) ** 2)))
        rows.append((n, tail / peak if peak > 0 else 0.0, l2_norm(final, grid), distance))
    return StudyTable(
        "N",
        ("n_points", "tail_ratio", "final_l2", "distance_to_finest"),
        rows,
        {"finest_tail_ratio": rows[-1][1]},
    )


def picard_study(problem: ProblemSpec, window: TimeWindow, config: SolveConfig) -> StudyTable:
    report, _ = solve(problem, window, config)
    bound = report.ratio_bound(config.slack)
    rows = []
    residuals = report.residuals
    for n, residual in enumerate(residuals):
        ratio = None
        if n > 0 and residuals[n - 1] > 1e2 * np.finfo(float).eps:
            ratio = residual / residuals[n - 1]
        rows.append((n + 1, residual, ratio, bound))
    final_ratio = report.ratios[-1] if report.ratios else 0.0
    return StudyTable(
        "picard",
        ("iteration", "residual", "ratio", "bound"),
        rows,
        {
            "iterations": report.iterations,
            "final_ratio": final_ratio,
            "max_ratio": max(report.ratios, default=0.0),
            "bound": bound,
            "within_bound": all(r <= bound for r in report.ratios),
        },
    )


def contraction_study(
    problem: ProblemSpec,
    window: TimeWindow,
    seed: int,
    slack: float,
    pairs: int = CONTRACTION_PAIRS,
) -> StudyTable:
    """Measured W^{1,2,2} and L2-denominator ratios over seeded random smooth pairs."""
    certificate = certify(problem, window)
    rng = np.random.default_rng(seed)
    rows = []
    for pair in range(pairs):
        v1, dv1 = random_smooth_field(problem.grid, window, rng)
        v2, dv2 = random_smooth_field(problem.grid, window, rng)
        ratio, ratio_l2 = contraction_ratio(problem, window, v1, dv1, v2, dv2)
        rows.append((pair, ratio, ratio_l2, certificate.constant))
    worst = max(row[1] for row in rows)
    bound = certificate.constant + slack
    logger.info(f"contraction study: max ratio {worst:.4f} against C + slack = {bound:.4f}")
    return StudyTable(
        "contraction",
        ("pair", "ratio_w122", "ratio_l2", "constant"),
        rows,
        {"max_ratio": worst, "constant": certificate.constant, "bound": bound, "within_bound": worst <= bound},
    )


def run_study(mode: str, run_config, problem: ProblemSpec, window: TimeWindow, config: SolveConfig) -> StudyTable:
    if mode == "dt":
        return dt_study(problem, window, config)
    if mode == "N":
        return n_study(run_config, window, config)
    if mode == "picard":
        return picard_study(problem, window, config)
    if mode == "contraction":
        return contraction_study(problem, window, config.seed, config.slack)
    raise ParameterError(f"unknown study mode {mode!r}, expected one of {STUDY_MODES}")
