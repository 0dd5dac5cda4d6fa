#!/usr/bin/env python3
"""
DKPP Contraction Certificate Module
The constant C = Q l sqrt(T^2 e^(2aT) (1 + 2 [a + |b| + 1]^2) + 1); the block map is a
strict contraction in W^{1,2,2}(R x [0, T]) whenever C < 1.
"""

import logging
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import bisect

from config import HORIZON_TOLERANCE
from model.problem import ProblemSpec, TimeWindow

logger = logging.getLogger(__name__)

LOG_FLOAT_MAX = math.log(sys.float_info.max)


def contraction_constant(q: float, l: float, a: float, b: float, horizon: float) -> float:
    """C(T), evaluated in log space; inf once C leaves the float range."""
    ql = q * l
    if ql == 0.0 or horizon == 0.0:
        return ql
    growth = 1.0 + 2.0 * (a + abs(b) + 1.0) ** 2
    exponent = 2.0 * math.log(horizon) + 2.0 * a * horizon + math.log(growth)
    log_c = math.log(ql) + 0.5 * float(np.logaddexp(exponent, 0.0))
    if log_c >= LOG_FLOAT_MAX:
        return math.inf
    return math.exp(log_c)


@dataclass(frozen=True)
class ContractionCertificate:
    q: float
    l: float
    k: float
    a: float
    b: float
    horizon: float
    constant: float

    @property
    def admissible(self) -> bool:
        return self.constant < 1.0

    @property
    def margin(self) -> float:
        return 1.0 - self.constant

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(admissible=self.admissible, margin=self.margin)
        return out


@dataclass(frozen=True)
class Horizon:
    """Largest admissible T, with an explanation when none exists."""

    t_max: float
    explanation: str

    def to_dict(self) -> dict:
        return asdict(self)


def certify(problem: ProblemSpec, window: TimeWindow) -> ContractionCertificate:
    """Builds the certificate for a problem on a window; inadmissible is a verdict, not an error."""
    q = problem.kernel.q
    l = problem.nonlinearity.lipschitz_l
    constant = contraction_constant(q, l, problem.a, problem.b, window.horizon)
    return ContractionCertificate(
        q=q,
        l=l,
        k=problem.nonlinearity.growth_k,
        a=problem.a,
        b=problem.b,
        horizon=window.horizon,
        constant=constant,
    )


def horizon_for(q: float, l: float, a: float, b: float, tolerance: float = HORIZON_TOLERANCE) -> Horizon:
    """
    Largest T with C(T) < 1, found by bisection of the strictly increasing
    map T -> C(T).

    The returned T satisfies C(T) < 1 <= C(T + tolerance).
    """
    at_zero = q * l
    if at_zero == 0.0:
        return Horizon(math.inf, "Q*l = 0: the map is constant in v, every T is admissible")
    if at_zero >= 1.0:
        explanation = (
            f"Q*l = {at_zero:.6g} >= 1: C(T) >= C(0) = Q*l for every T, so no window is admissible"
        )
        logger.warning(explanation)
        return Horizon(0.0, explanation)

    def excess(horizon):
        return contraction_constant(q, l, a, b, horizon) - 1.0

    upper = 1.0
    while excess(upper) < 0.0:
        upper *= 2.0
    root = bisect(excess, 0.0, upper, xtol=1e-13)
    # step below the root until strictly admissible
    t_max = root
    step = max(1e-15, 1e-3 * tolerance)
    while excess(t_max) >= 0.0:
        t_max -= step
    return Horizon(max(t_max, 0.0), f"C(T) < 1 for T < {t_max:.10g}")


def max_horizon(problem: ProblemSpec) -> Horizon:
    return horizon_for(problem.kernel.q, problem.nonlinearity.lipschitz_l, problem.a, problem.b)
