"""Minimal run times for the two search stages under the linear schedule.

The first-stage time is the quadrature

    T1 = (1/eps) * integral_0^1 sqrt( sum_i xi_i^2 / w_i(s)^6 ) ds

over the subsystems searched in parallel, where xi_i is the transition
strength and w_i(s) the gap of subsystem i.  The integrand is sharply peaked
at s = 1/2 with width of order sqrt(M/N), so the adaptive quadrature is
forced to split there.  The second stage repeats a fixed-cost step
ceil(sqrt(prod_i M_i / M_joint)) times, giving a total of T1 * iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .spectral import SubsystemShape, _exp2, transition_strength

__all__ = [
    "AccuracyTarget",
    "TimeBudget",
    "DEFAULT_QUAD_TOLERANCE",
    "stage1_time",
    "stage2_iterations",
    "total_time",
    "approx_stage1_time",
    "approx_total_time",
]

DEFAULT_QUAD_TOLERANCE = 1e-8

_PEAK_GRID_POINTS = 2001


@dataclass(frozen=True)
class AccuracyTarget:
    """Adiabatic accuracy parameter; smaller epsilon buys a slower, more
    faithful sweep.  Run times scale exactly as 1/epsilon."""

    epsilon: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class TimeBudget:
    """Cost breakdown of one nested run.

    total_time is exactly stage1_time * iterations.  `degenerate` marks the
    no-search-needed case (every subsystem fully marked, stage1_time = 0);
    `clamped` is carried along when the inputs came from a clamped model
    estimate.
    """

    stage1_time: float
    iterations: int
    total_time: float
    integrand_peak_s: float
    quadrature_error_estimate: float
    degenerate: bool = False
    clamped: bool = False


def _terms(shapes: list[SubsystemShape]) -> list[tuple[float, float]]:
    """(xi^2, ratio) per subsystem, sorted so that permutations of the input
    produce bit-identical quadratures."""
    out = []
    for shape in shapes:
        xi = transition_strength(shape)
        if xi > 0.0:
            out.append((xi * xi, shape.ratio))
    out.sort(key=lambda t: (t[1], t[0]))
    return out


def _integrand(s: float, terms: list[tuple[float, float]]) -> float:
    u = 1.0 - 2.0 * s
    uu = u * u
    acc = 0.0
    for xi2, r in terms:
        w2 = uu + 4.0 * r * s * (1.0 - s)
        acc += xi2 / (w2 * w2 * w2)
    return math.sqrt(acc)


def _integrand_grid(s: np.ndarray, terms: list[tuple[float, float]]) -> np.ndarray:
    uu = (1.0 - 2.0 * s) ** 2
    acc = np.zeros_like(s)
    for xi2, r in terms:
        w2 = uu + 4.0 * r * s * (1.0 - s)
        acc += xi2 / (w2 * w2 * w2)
    return np.sqrt(acc)


def stage1_time(
    shapes: list[SubsystemShape],
    target: AccuracyTarget | None = None,
    *,
    tolerance: float = DEFAULT_QUAD_TOLERANCE,
) -> TimeBudget:
    """Minimal first-stage time for searching `shapes` in parallel.

    Returns a TimeBudget with iterations = 1 (composition with the second
    stage happens in total_time).  When every subsystem is fully marked the
    integrand vanishes identically and a zero budget is returned with the
    degenerate flag set.
    """
    if not shapes:
        raise ValueError("at least one subsystem shape is required")
    if target is None:
        target = AccuracyTarget()
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    terms = _terms(shapes)
    if not terms:
        return TimeBudget(
            stage1_time=0.0,
            iterations=1,
            total_time=0.0,
            integrand_peak_s=0.5,
            quadrature_error_estimate=0.0,
            degenerate=True,
        )
    integral, abserr = quad(
        _integrand,
        0.0,
        1.0,
        args=(terms,),
        points=[0.5],
        epsabs=0.0,
        epsrel=tolerance,
        limit=250,
    )
    grid = np.linspace(0.0, 1.0, _PEAK_GRID_POINTS)
    peak_s = float(grid[int(np.argmax(_integrand_grid(grid, terms)))])
    t1 = integral / target.epsilon
    return TimeBudget(
        stage1_time=t1,
        iterations=1,
        total_time=t1,
        integrand_peak_s=peak_s,
        quadrature_error_estimate=abserr / target.epsilon,
    )


def _ceil_sqrt_ratio(num: int, den: int) -> int:
    """Smallest integer t with t*t*den >= num, computed exactly."""
    t = math.isqrt(num // den)
    while t * t * den < num:
        t += 1
    return t


def _iterations(product_m: float, m_joint: float, constant: float) -> int:
    if m_joint <= 0:
        raise ValueError("no global solution: joint solution count must be positive")
    if m_joint > product_m * (1.0 + 1e-12):
        raise ValueError(
            f"joint solution count {m_joint} exceeds the product of "
            f"subsystem counts {product_m}"
        )
    if (
        constant == 1.0
        and isinstance(product_m, int)
        and isinstance(m_joint, int)
    ):
        return max(1, _ceil_sqrt_ratio(product_m, m_joint))
    return max(1, math.ceil(constant * math.sqrt(product_m / m_joint)))


def stage2_iterations(
    m_a: float, m_b: float, m_ab: float, *, constant: float = 1.0
) -> int:
    """Number of second-stage repetitions, ceil(sqrt(M_A M_B / M_AB)).

    `constant` is an explicit prefactor knob (default 1).  Integer inputs are
    resolved exactly; fractional model estimates (including M_AB below 1 for
    probably-unsatisfiable regimes) go through floating point.
    """
    if m_a < 1 or m_b < 1:
        raise ValueError("subsystem solution counts must be at least 1")
    if constant <= 0.0:
        raise ValueError(f"iteration constant must be positive, got {constant}")
    if isinstance(m_a, int) and isinstance(m_b, int):
        return _iterations(m_a * m_b, m_ab, constant)
    return _iterations(float(m_a) * float(m_b), m_ab, constant)


def total_time(
    shapes: list[SubsystemShape],
    m_joint: float,
    target: AccuracyTarget | None = None,
    *,
    constant: float = 1.0,
    tolerance: float = DEFAULT_QUAD_TOLERANCE,
) -> TimeBudget:
    """Full nested cost: first-stage quadrature times the iteration count
    ceil(sqrt(prod_i M_i / M_joint)) over any number of subsystems."""
    budget = stage1_time(shapes, target, tolerance=tolerance)
    if all(isinstance(s.solutions, int) for s in shapes):
        product_m: float = math.prod(int(s.solutions) for s in shapes)
    else:
        product_m = math.prod(float(s.solutions) for s in shapes)
    iterations = _iterations(product_m, m_joint, constant)
    return replace(
        budget,
        iterations=iterations,
        total_time=budget.stage1_time * iterations,
    )


def approx_stage1_time(
    shapes: list[SubsystemShape], target: AccuracyTarget | None = None
) -> float:
    """Closed-form stand-in sqrt(max_i N_i/M_i) / epsilon for the first-stage
    quadrature; tracks it to within a small constant factor once every
    marked fraction is small."""
    if not shapes:
        raise ValueError("at least one subsystem shape is required")
    if target is None:
        target = AccuracyTarget()
    smallest_ratio = min(s.ratio for s in shapes)
    return 1.0 / (math.sqrt(smallest_ratio) * target.epsilon)


def approx_total_time(
    shapes: list[SubsystemShape], m_joint: float, target: AccuracyTarget | None = None
) -> float:
    """Closed-form total cost sqrt(max(N_A M_B, N_B M_A) / M_AB) / epsilon
    for exactly two subsystems."""
    if len(shapes) != 2:
        raise ValueError("the closed-form total requires exactly two subsystems")
    if m_joint <= 0:
        raise ValueError("no global solution: joint solution count must be positive")
    if target is None:
        target = AccuracyTarget()
    sa, sb = shapes
    log2_candidates = (
        sa.log2_dimension + sb.log2_solutions,
        sb.log2_dimension + sa.log2_solutions,
    )
    log2_val = 0.5 * (max(log2_candidates) - math.log2(m_joint))
    return _exp2(log2_val) / target.epsilon
