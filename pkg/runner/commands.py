#!/usr/bin/env python3
"""
DKPP Commands Module
The five operator commands. Each returns an exit code and writes its
artifacts into the run directory; failures are mapped to exit codes by
exit_code_for.

Exit codes: 0 success, 1 validation, 2 inadmissible or refused, 3 non-convergence.
"""

import logging
from pathlib import Path

import numpy as np

from errors import (
    AssumptionViolation,
    DkppError,
    NonConvergenceError,
    RefusalError,
)
from model.nonlinearity import estimate_lipschitz, verify_growth
from model.problem import ProblemSpec, SpaceTimeField, TimeWindow, random_smooth_field
from oracle.reference import reference_solution
from runner import artifacts
from runner.run_config import RunConfig, build_problem, resolve_window
from runner.studies import run_study
from solver.bounds import energy_bounds
from solver.certificate import ContractionCertificate, certify
from solver.picard import (
    check_nontriviality,
    contraction_ratio,
    march_global,
    solve,
    space_time_l2_norm,
    verify_solution,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INADMISSIBLE = 2
EXIT_NONCONVERGENCE = 3

REPORT_SCHEMA = "dkpp-report/1"
CERTIFICATE_FILE = "certificate.json"
SEAMS_FILE = "seams.csv"


def exit_code_for(error: Exception) -> int:
    if isinstance(error, NonConvergenceError):
        return EXIT_NONCONVERGENCE
    if isinstance(error, RefusalError):
        return EXIT_INADMISSIBLE
    if isinstance(error, DkppError):
        return EXIT_VALIDATION
    raise error


def _run_dir(run_config: RunConfig) -> Path:
    run_dir = Path(run_config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def verify_assumptions(problem: ProblemSpec, run_config: RunConfig) -> dict:
    """
    Lipschitz and growth sweeps over the configured u range.

    Raises:
        AssumptionViolation: If either sweep finds a witness
    """
    estimate = estimate_lipschitz(problem.nonlinearity, run_config.u_range, run_config.samples, run_config.seed)
    growth = verify_growth(problem.nonlinearity, run_config.u_range, run_config.samples, run_config.seed)
    if not growth.passed:
        raise AssumptionViolation(
            f"growth bound |F| <= k|u| + h fails (excess {growth.worst_excess:.6g})", growth.witness
        )
    return {"lipschitz_estimate": estimate, "growth": growth.to_dict()}


def _certificate_at_zero(problem: ProblemSpec) -> ContractionCertificate:
    q, l = problem.kernel.q, problem.nonlinearity.lipschitz_l
    return ContractionCertificate(
        q=q, l=l, k=problem.nonlinearity.growth_k, a=problem.a, b=problem.b, horizon=0.0, constant=q * l
    )


def cmd_certify(run_config: RunConfig) -> int:
    """
    Writes certificate.json with the contraction certificate, the horizon and
    both nonlinearity sweeps.

    Returns:
        int: 0 if admissible, 2 if not
    """
    problem = build_problem(run_config)
    assumptions = verify_assumptions(problem, run_config)
    window, horizon = resolve_window(run_config, problem)
    certificate = certify(problem, window) if window is not None else _certificate_at_zero(problem)
    document = {
        "schema": REPORT_SCHEMA,
        "problem": problem.describe(),
        "window": None if window is None else window.describe(),
        "horizon": horizon.to_dict(),
        "certificate": certificate.to_dict(),
        "assumptions": assumptions,
        "nontriviality": check_nontriviality(problem).value,
    }
    artifacts.write_json(_run_dir(run_config) / CERTIFICATE_FILE, document)

    if not certificate.admissible:
        print(f"❌ Inadmissible: C = {certificate.constant:.6g} >= 1. {horizon.explanation}", flush=True)
        return EXIT_INADMISSIBLE
    print(f"✅ Admissible: C = {certificate.constant:.6g} on T = {certificate.horizon:.6g} "
          f"(T_max = {horizon.t_max:.6g})", flush=True)
    return EXIT_OK


def _window_or_refuse(run_config: RunConfig, problem: ProblemSpec) -> TimeWindow:
    window, horizon = resolve_window(run_config, problem)
    if window is None:
        raise RefusalError(f"no admissible window: {horizon.explanation}", _certificate_at_zero(problem))
    return window


def _relative_error(solution: SpaceTimeField, reference: SpaceTimeField) -> float:
    scale = space_time_l2_norm(reference)
    distance = space_time_l2_norm(solution - reference)
    return distance / scale if scale > 0 else distance


def verify_run(problem: ProblemSpec, window: TimeWindow, report, solution: SpaceTimeField, run_config: RunConfig):
    """Adds the Duhamel residual, ratio checks, energy bounds and the oracle comparison."""
    verify_solution(problem, window, report, solution, run_config.slack)
    rng = np.random.default_rng(run_config.seed)
    v1, dv1 = random_smooth_field(problem.grid, window, rng)
    v2, dv2 = random_smooth_field(problem.grid, window, rng)
    measured, measured_l2 = contraction_ratio(problem, window, v1, dv1, v2, dv2)
    report.checks["measured_contraction_ratio"] = measured
    report.checks["measured_contraction_ratio_l2"] = measured_l2
    report.checks["measured_within_bound"] = measured <= report.ratio_bound(run_config.slack)

    energy = energy_bounds(problem, window, solution)
    report.checks["energy_bounds"] = energy.to_dict()

    oracle = reference_solution(problem, window)
    report.checks["oracle"] = dict(oracle.to_dict(), relative_error=_relative_error(solution, oracle.reference))
    return report


def _solve_document(run_config: RunConfig, problem: ProblemSpec, window: TimeWindow, assumptions: dict) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "config": run_config.to_dict(),
        "problem": problem.describe(),
        "window": window.describe(),
        "assumptions": assumptions,
    }


def cmd_solve(run_config: RunConfig, verify: bool = False, allow_uncertified: bool = False) -> int:
    """
    Solves on one window and writes field.dkpp, residuals.csv, report.json and
    config.json. Non-convergence still writes the last iterate and the history.
    """
    problem = build_problem(run_config)
    assumptions = verify_assumptions(problem, run_config)
    window = _window_or_refuse(run_config, problem)
    run_dir = _run_dir(run_config)
    artifacts.write_json(run_dir / artifacts.CONFIG_COPY, run_config.to_dict())
    document = _solve_document(run_config, problem, window, assumptions)

    try:
        report, solution = solve(problem, window, run_config.solve_config(allow_uncertified))
    except NonConvergenceError as e:
        document["solve"] = {"converged": False, "residuals": e.residuals, "ratios": e.ratios}
        artifacts.write_residuals(run_dir / artifacts.RESIDUALS_FILE, e.residuals)
        if e.last_iterate is not None:
            artifacts.write_snapshot(run_dir / artifacts.FIELD_FILE, e.last_iterate)
        artifacts.write_json(run_dir / artifacts.REPORT_FILE, document)
        print(f"❌ {e}", flush=True)
        return EXIT_NONCONVERGENCE

    report.nontriviality = check_nontriviality(problem).value
    if verify:
        verify_run(problem, window, report, solution, run_config)
    document["solve"] = report.to_dict()
    document["norms"] = report.norms

    artifacts.write_snapshot(run_dir / artifacts.FIELD_FILE, solution)
    artifacts.write_residuals(run_dir / artifacts.RESIDUALS_FILE, report.residuals)
    artifacts.write_json(run_dir / artifacts.REPORT_FILE, document)
    print(f"✅ Converged in {report.iterations} iterations; outputs in {run_dir}", flush=True)
    return EXIT_OK


def cmd_march(run_config: RunConfig, total_time: float, allow_uncertified: bool = False) -> int:
    """
    Marches windows of the configured length up to total_time and writes one
    snapshot per window, seams.csv and a report with one entry per window.
    """
    problem = build_problem(run_config)
    assumptions = verify_assumptions(problem, run_config)
    window = _window_or_refuse(run_config, problem)
    run_dir = _run_dir(run_config)
    artifacts.write_json(run_dir / artifacts.CONFIG_COPY, run_config.to_dict())
    document = _solve_document(run_config, problem, window, assumptions)
    document["total_time"] = total_time

    try:
        result = march_global(problem, window.horizon, total_time, window.steps, run_config.solve_config(allow_uncertified))
    except NonConvergenceError as e:
        document["failed_window"] = e.window_index
        document["solve"] = {"converged": False, "residuals": e.residuals, "ratios": e.ratios}
        artifacts.write_json(run_dir / artifacts.REPORT_FILE, document)
        print(f"❌ Window {e.window_index}: {e}", flush=True)
        return EXIT_NONCONVERGENCE

    entries = []
    residual_rows = []
    for index, (solution, report, start) in enumerate(zip(result.windows, result.reports, result.start_times)):
        artifacts.write_snapshot(run_dir / artifacts.window_field_file(index), solution)
        entry = dict(report.to_dict(), index=index, start_time=start, window=solution.window.describe())
        entry["seam_jump"] = result.seam_jumps[index - 1] if index > 0 else None
        entries.append(entry)
        residual_rows.extend(row + (index,) for row in artifacts.residual_rows(report.residuals))

    document["windows"] = entries
    document["seam_jumps"] = result.seam_jumps
    document["nontriviality"] = check_nontriviality(problem).value
    artifacts.write_table(run_dir / artifacts.RESIDUALS_FILE, ("iteration", "residual", "ratio", "window"), residual_rows)
    artifacts.write_table(
        run_dir / SEAMS_FILE,
        ("window", "start_time", "seam_jump"),
        [(i + 1, result.start_times[i + 1], jump) for i, jump in enumerate(result.seam_jumps)],
    )
    artifacts.write_json(run_dir / artifacts.REPORT_FILE, document)
    print(f"✅ Marched {len(result.windows)} windows to t = {total_time:g}; outputs in {run_dir}", flush=True)
    return EXIT_OK


def cmd_study(run_config: RunConfig, mode: str, allow_uncertified: bool = False) -> int:
    """Writes study_<mode>.csv and a study_<mode>.json summary."""
    problem = build_problem(run_config)
    window = _window_or_refuse(run_config, problem)
    table = run_study(mode, run_config, problem, window, run_config.solve_config(allow_uncertified))
    run_dir = _run_dir(run_config)
    artifacts.write_table(run_dir / f"study_{mode}.csv", table.header, table.rows)
    artifacts.write_json(run_dir / f"study_{mode}.json", {"mode": mode, "summary": table.summary})
    print(f"✅ {mode} study: {table.summary}", flush=True)
    return EXIT_OK


def cmd_emit_plot(run_dir, what: str, out=None) -> int:
    path = artifacts.emit_plot(run_dir, what, out)
    print(f"✅ Plot data written to {path}", flush=True)
    return EXIT_OK
