"""Shared fixtures: grids, kernels and small problems."""

import numpy as np
import pytest

from model.kernel import build_kernel
from model.nonlinearity import build_nonlinearity
from model.problem import ProblemSpec, TimeWindow
from model.profiles import gaussian_profile
from spectral.grid import Grid

BOX = 16 * np.pi


@pytest.fixture
def grid():
    return Grid(BOX, 256)


@pytest.fixture
def small_grid():
    return Grid(BOX, 64)


@pytest.fixture
def gaussian_kernel(grid):
    return build_kernel("gaussian", {"sigma": 1.0}, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_problem(
    grid,
    kind="linear",
    c=0.05,
    alpha=0.5,
    a=0.0,
    b=0.0,
    sigma=1.0,
    source=None,
    u0=None,
    oracle_mode=False,
    **nonlinearity_kwargs,
):
    kernel = build_kernel("gaussian", {"sigma": sigma}, grid)
    nonlinearity = build_nonlinearity(kind, grid, coefficient=c, source=source, **nonlinearity_kwargs)
    if u0 is None:
        u0 = gaussian_profile(grid, 1.0, 1.0)
    return ProblemSpec(
        alpha=alpha,
        a=a,
        b=b,
        kernel=kernel,
        nonlinearity=nonlinearity,
        u0=u0,
        grid=grid,
        oracle_mode=oracle_mode,
    )


@pytest.fixture
def problem_factory():
    return make_problem


@pytest.fixture
def linear_problem(grid):
    return make_problem(grid)


@pytest.fixture
def saturating_problem(grid):
    source = gaussian_profile(grid, 0.05, 1.5)
    return make_problem(grid, kind="saturating", c=0.1, a=0.1, b=0.5, source=source)


@pytest.fixture
def short_window():
    return TimeWindow(0.5, 100)
