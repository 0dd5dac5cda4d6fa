#!/usr/bin/env python3
"""
DKPP Grid Module
Periodic truncation [-L, L) of the real line and its frequency set.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from config import MIN_POINTS
from errors import ParameterError


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic grid on [-L, L).

    Frequencies are stored in FFT order, p_k = (pi / L) * k with
    k = 0, 1, ..., N/2 - 1, -N/2, ..., -1. The single unpaired mode
    k = -N/2 is the Nyquist mode.

    Attributes:
        half_width (float): L
        n_points (int): N, even and at least 8
    """

    half_width: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ParameterError(f"half_width must be positive and finite, got {self.half_width}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS or self.n_points % 2:
            raise ParameterError(f"n_points must be an even integer >= {MIN_POINTS}, got {self.n_points}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def dp(self) -> float:
        return np.pi / self.half_width

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_points)

    @cached_property
    def k(self) -> np.ndarray:
        """Integer mode numbers in FFT order."""
        return np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).astype(np.int64)

    @cached_property
    def p(self) -> np.ndarray:
        return self.dp * self.k

    @cached_property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    @cached_property
    def phase(self) -> np.ndarray:
        """(-1)^k, the shift from x_0 = -L to the FFT origin."""
        return np.where(self.k % 2 == 0, 1.0, -1.0)

    def describe(self) -> dict:
        return {"half_width": self.half_width, "n_points": self.n_points}
