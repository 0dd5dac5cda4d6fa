#!/usr/bin/env python3
"""
DKPP Run Config Module
Parses one versioned JSON run config into frozen dataclasses and builds the
problem objects from it. Every field-level problem is collected before a
single ConfigError is raised; unknown keys are errors.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from config import (
    CONFIG_SCHEMA,
    CONTRACTION_SLACK,
    DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
    HORIZON_SAFETY,
    MIN_VERIFY_SAMPLES,
    OUTPUT_DIR,
    VERIFY_SAMPLES,
    VERIFY_U_RANGE,
)
from errors import ConfigError, DkppError
from model.kernel import KERNEL_KINDS, kernel_from_descriptor
from model.nonlinearity import BASE_RATES, nonlinearity_from_descriptor
from model.problem import ProblemSpec, TimeWindow, check_initial_decay
from model.profiles import build_profile
from solver.certificate import max_horizon
from solver.picard import SolveConfig
from spectral.grid import Grid

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {
    "schema", "problem", "grid", "window", "kernel", "nonlinearity",
    "initial", "solver", "verification", "seed", "output_dir",
}
REQUIRED_KEYS = ("schema", "problem", "grid", "window", "kernel", "nonlinearity", "initial")

SECTION_KEYS = {
    "problem": {"alpha", "a", "b", "oracle_mode"},
    "grid": {"half_width", "n_points"},
    "window": {"horizon", "steps"},
    "solver": {"tolerance", "max_iter", "initial_guess", "slack"},
    "verification": {"u_range", "samples"},
}

KERNEL_KEYS = {
    "gaussian": {"sigma", "amplitude"},
    "bump": {"width", "amplitude"},
    "sinc_squared": {"bandwidth", "amplitude"},
    "laplace": set(),
    "tabulated": {"path", "amplitude"},
}

PROFILE_KEYS = {
    "gaussian": {"amplitude", "sigma"},
    "band_limited": {"amplitude", "p_low", "p_high"},
    "sine": {"amplitude", "mode"},
    "tabulated": {"path"},
    "zero": set(),
}

NONLINEARITY_KEYS = {"kind", "c", "k", "l", "source"}
GUESS_KINDS = ("extension", "zero", "random")


@dataclass(frozen=True)
class RunConfig:
    """
    One validated run.

    Attributes:
        horizon: Window length, or 'auto' for HORIZON_SAFETY * T_max
        seed (int): Seeds the verification sweeps and the random initial guess
    """

    alpha: float
    a: float
    b: float
    half_width: float
    n_points: int
    horizon: Union[float, str]
    steps: int
    kernel: dict
    nonlinearity: dict
    initial: dict
    oracle_mode: bool = False
    tolerance: float = DEFAULT_TOLERANCE
    max_iter: int = DEFAULT_MAX_ITER
    initial_guess: str = "extension"
    slack: float = CONTRACTION_SLACK
    u_range: tuple = VERIFY_U_RANGE
    samples: int = VERIFY_SAMPLES
    seed: int = 0
    output_dir: Path = field(default=OUTPUT_DIR)
    source_path: Optional[Path] = None

    def with_overrides(self, seed=None, output_dir=None) -> "RunConfig":
        changes = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        return replace(self, **changes) if changes else self

    def solve_config(self, allow_uncertified: bool = False) -> SolveConfig:
        return SolveConfig(
            tolerance=self.tolerance,
            max_iter=self.max_iter,
            initial_guess=self.initial_guess,
            allow_uncertified=allow_uncertified,
            slack=self.slack,
            seed=self.seed,
        )

    def to_dict(self) -> dict:
        """Canonical JSON view written next to every run's outputs."""
        return {
            "schema": CONFIG_SCHEMA,
            "problem": {"alpha": self.alpha, "a": self.a, "b": self.b, "oracle_mode": self.oracle_mode},
            "grid": {"half_width": self.half_width, "n_points": self.n_points},
            "window": {"horizon": self.horizon, "steps": self.steps},
            "kernel": dict(self.kernel),
            "nonlinearity": dict(self.nonlinearity),
            "initial": dict(self.initial),
            "solver": {
                "tolerance": self.tolerance,
                "max_iter": self.max_iter,
                "initial_guess": self.initial_guess,
                "slack": self.slack,
            },
            "verification": {"u_range": list(self.u_range), "samples": self.samples},
            "seed": self.seed,
        }


class _Collector:
    """Accumulates field-level diagnostics while reading a JSON document."""

    def __init__(self):
        self.errors = []

    def unknown(self, section: dict, allowed, prefix: str):
        for key in sorted(set(section) - set(allowed)):
            self.errors.append(f"{prefix}{key}: unknown key")

    def section(self, document: dict, name: str) -> dict:
        value = document.get(name, {})
        if not isinstance(value, dict):
            self.errors.append(f"{name}: must be an object")
            return {}
        return value

    def number(self, section: dict, key: str, prefix: str, default=None, check=None, message=""):
        if key not in section:
            if default is None:
                self.errors.append(f"{prefix}{key}: required")
            return default
        value = section[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.errors.append(f"{prefix}{key}: must be a finite number")
            return default
        if check is not None and not check(value):
            self.errors.append(f"{prefix}{key}: {message}")
            return default
        return float(value)

    def integer(self, section: dict, key: str, prefix: str, default=None, check=None, message=""):
        if key not in section:
            if default is None:
                self.errors.append(f"{prefix}{key}: required")
            return default
        value = section[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.errors.append(f"{prefix}{key}: must be an integer")
            return default
        if check is not None and not check(value):
            self.errors.append(f"{prefix}{key}: {message}")
            return default
        return value


def _resolve_path(descriptor: dict, base: Optional[Path]) -> dict:
    if "path" in descriptor and base is not None:
        path = Path(descriptor["path"])
        if not path.is_absolute():
            descriptor = dict(descriptor, path=str(base / path))
    return descriptor


def _resolve_output_dir(output_dir: str, base: Optional[Path], explicit: bool) -> Path:
    """A relative output_dir written in the config is taken relative to the config file."""
    path = Path(output_dir)
    if explicit and base is not None and not path.is_absolute():
        return base / path
    return path


def _profile(collector: _Collector, descriptor, prefix: str) -> dict:
    if not isinstance(descriptor, dict):
        collector.errors.append(f"{prefix.rstrip('.')}: must be an object")
        return {}
    kind = descriptor.get("kind")
    if kind not in PROFILE_KEYS:
        collector.errors.append(f"{prefix}kind: must be one of {sorted(PROFILE_KEYS)}, got {kind!r}")
        return descriptor
    collector.unknown(descriptor, PROFILE_KEYS[kind] | {"kind"}, prefix)
    if kind == "band_limited":
        collector.number(descriptor, "p_low", prefix)
        collector.number(descriptor, "p_high", prefix)
    if kind == "tabulated" and not isinstance(descriptor.get("path"), str):
        collector.errors.append(f"{prefix}path: required string")
    if kind in ("gaussian",) and "sigma" in descriptor:
        collector.number(descriptor, "sigma", prefix, check=lambda v: v > 0, message="must be positive")
    if kind == "sine" and "mode" in descriptor:
        collector.integer(descriptor, "mode", prefix, check=lambda v: v >= 1, message="must be at least 1")
    return descriptor


def parse_run_config(document: dict, base: Optional[Path] = None) -> RunConfig:
    """
    Validates a decoded JSON run config.

    Args:
        document (dict): Decoded JSON
        base (Path): Directory that relative CSV paths are resolved against

    Returns:
        RunConfig: The validated config

    Raises:
        ConfigError: With every field-level diagnostic found
    """
    c = _Collector()
    if not isinstance(document, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    c.unknown(document, TOP_LEVEL_KEYS, "")
    for key in REQUIRED_KEYS:
        if key not in document:
            c.errors.append(f"{key}: required")
    if "schema" in document and document["schema"] != CONFIG_SCHEMA:
        c.errors.append(f"schema: expected {CONFIG_SCHEMA!r}, got {document['schema']!r}")

    problem = c.section(document, "problem")
    c.unknown(problem, SECTION_KEYS["problem"], "problem.")
    oracle_mode = problem.get("oracle_mode", False)
    if not isinstance(oracle_mode, bool):
        c.errors.append("problem.oracle_mode: must be true or false")
        oracle_mode = False
    alpha = c.number(
        problem, "alpha", "problem.",
        check=lambda v: 0 < v < 1 or (v == 1 and oracle_mode),
        message="must lie in (0, 1) (1 only with oracle_mode)",
    )
    a = c.number(problem, "a", "problem.", default=0.0, check=lambda v: v >= 0, message="must be nonnegative")
    b = c.number(problem, "b", "problem.", default=0.0)

    grid = c.section(document, "grid")
    c.unknown(grid, SECTION_KEYS["grid"], "grid.")
    half_width = c.number(grid, "half_width", "grid.", check=lambda v: v > 0, message="must be positive")
    n_points = c.integer(
        grid, "n_points", "grid.", check=lambda v: v >= 8 and v % 2 == 0, message="must be an even integer >= 8"
    )

    window = c.section(document, "window")
    c.unknown(window, SECTION_KEYS["window"], "window.")
    horizon = window.get("horizon")
    if horizon == "auto":
        pass
    elif "horizon" not in window:
        c.errors.append("window.horizon: required (a positive number or 'auto')")
    else:
        horizon = c.number(window, "horizon", "window.", check=lambda v: v > 0, message="must be positive or 'auto'")
    steps = c.integer(window, "steps", "window.", check=lambda v: v >= 1, message="must be at least 1")

    kernel = c.section(document, "kernel")
    kind = kernel.get("kind")
    if kind not in KERNEL_KINDS:
        c.errors.append(f"kernel.kind: must be one of {list(KERNEL_KINDS)}, got {kind!r}")
    else:
        c.unknown(kernel, KERNEL_KEYS[kind] | {"kind"}, "kernel.")
        if kind == "tabulated" and not isinstance(kernel.get("path"), str):
            c.errors.append("kernel.path: required string")
    kernel = _resolve_path(kernel, base)

    nonlinearity = c.section(document, "nonlinearity")
    c.unknown(nonlinearity, NONLINEARITY_KEYS, "nonlinearity.")
    if nonlinearity.get("kind") not in BASE_RATES:
        c.errors.append(f"nonlinearity.kind: must be one of {sorted(BASE_RATES)}, got {nonlinearity.get('kind')!r}")
    for key in ("c", "k", "l"):
        if key in nonlinearity:
            c.number(nonlinearity, key, "nonlinearity.", check=lambda v: key == "c" or v >= 0, message="must be nonnegative")
    if "source" in nonlinearity:
        source = _resolve_path(_profile(c, nonlinearity["source"], "nonlinearity.source."), base)
        nonlinearity = dict(nonlinearity, source=source)

    initial = _resolve_path(_profile(c, document.get("initial", {}), "initial."), base)

    solver = c.section(document, "solver")
    c.unknown(solver, SECTION_KEYS["solver"], "solver.")
    tolerance = c.number(solver, "tolerance", "solver.", default=DEFAULT_TOLERANCE, check=lambda v: v > 0, message="must be positive")
    max_iter = c.integer(solver, "max_iter", "solver.", default=DEFAULT_MAX_ITER, check=lambda v: v >= 1, message="must be at least 1")
    slack = c.number(solver, "slack", "solver.", default=CONTRACTION_SLACK, check=lambda v: v >= 0, message="must be nonnegative")
    initial_guess = solver.get("initial_guess", "extension")
    if initial_guess not in GUESS_KINDS:
        c.errors.append(f"solver.initial_guess: must be one of {list(GUESS_KINDS)}, got {initial_guess!r}")

    verification = c.section(document, "verification")
    c.unknown(verification, SECTION_KEYS["verification"], "verification.")
    u_range = verification.get("u_range", list(VERIFY_U_RANGE))
    if (
        not isinstance(u_range, list)
        or len(u_range) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in u_range)
        or not u_range[1] > u_range[0]
    ):
        c.errors.append("verification.u_range: must be [low, high] with low < high")
        u_range = list(VERIFY_U_RANGE)
    samples = c.integer(
        verification, "samples", "verification.", default=VERIFY_SAMPLES,
        check=lambda v: v >= MIN_VERIFY_SAMPLES, message=f"must be at least {MIN_VERIFY_SAMPLES}",
    )

    seed = c.integer(document, "seed", "", default=0, check=lambda v: 0 <= v < 2 ** 64, message="must fit in an unsigned 64-bit integer")
    output_dir = document.get("output_dir", str(OUTPUT_DIR))
    if not isinstance(output_dir, str):
        c.errors.append("output_dir: must be a string")
        output_dir = str(OUTPUT_DIR)

    if c.errors:
        raise ConfigError(c.errors)

    return RunConfig(
        alpha=alpha,
        a=a,
        b=b,
        half_width=half_width,
        n_points=n_points,
        horizon=horizon,
        steps=steps,
        kernel=kernel,
        nonlinearity=nonlinearity,
        initial=initial,
        oracle_mode=oracle_mode,
        tolerance=tolerance,
        max_iter=max_iter,
        initial_guess=initial_guess,
        slack=slack,
        u_range=(float(u_range[0]), float(u_range[1])),
        samples=samples,
        seed=seed,
        output_dir=_resolve_output_dir(output_dir, base, "output_dir" in document),
        source_path=None if base is None else base,
    )


def load_run_config(path) -> RunConfig:
    """
    Reads and validates a run config file.

    Raises:
        ConfigError: If the file is missing, is not JSON, or fails validation
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config: file not found: {path}"])
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError([f"config: invalid JSON at line {e.lineno}: {e.msg}"]) from e
    return parse_run_config(document, base=path.parent)


def build_problem(run_config: RunConfig) -> ProblemSpec:
    """
    Builds grid, kernel, nonlinearity and initial condition.

    Raises:
        AdmissibilityError: If the kernel is inadmissible
        ConfigError: If a descriptor cannot be realized on the grid
    """
    grid = Grid(run_config.half_width, run_config.n_points)
    try:
        kernel = kernel_from_descriptor(run_config.kernel, grid)
        nonlinearity = nonlinearity_from_descriptor(run_config.nonlinearity, grid)
        u0 = build_profile(run_config.initial, grid)
    except (KeyError, FileNotFoundError) as e:
        raise ConfigError([f"profile: {e}"]) from e
    problem = ProblemSpec(
        alpha=run_config.alpha,
        a=run_config.a,
        b=run_config.b,
        kernel=kernel,
        nonlinearity=nonlinearity,
        u0=u0,
        grid=grid,
        oracle_mode=run_config.oracle_mode,
    )
    check_initial_decay(problem)
    return problem


def resolve_window(run_config: RunConfig, problem: ProblemSpec):
    """
    Returns (TimeWindow or None, Horizon). A window is None only when the
    horizon is 'auto' and no admissible horizon exists.

    Raises:
        ConfigError: If 'auto' is requested but every horizon is admissible
    """
    horizon = max_horizon(problem)
    if run_config.horizon != "auto":
        return TimeWindow(run_config.horizon, run_config.steps), horizon
    if horizon.t_max == 0.0:
        return None, horizon
    if math.isinf(horizon.t_max):
        raise ConfigError(["window.horizon: 'auto' needs a finite T_max; give a number"])
    return TimeWindow(HORIZON_SAFETY * horizon.t_max, run_config.steps), horizon


def describe_failure(error: DkppError) -> str:
    if isinstance(error, ConfigError):
        return str(error)
    return f"{type(error).__name__}: {error}"
