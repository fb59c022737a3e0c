"""Error bounds, probability estimates, step planning and ALT comparison.

Scalar closed forms, plus two helpers that extract their inputs from
simulations: the empirical evolution-error fit (C, q) and the gap to the
nearest populated level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSpectrumError, UndefinedOverlapError
from .evolution import Propagator, evolve_trajectory
from .filtering import state_error


@dataclass(frozen=True)
class AnalysisInputs:
    suppression: float
    overlap: float
    gain: float
    lobe_width: float
    bandwidth: float
    gap: float
    evolution_constant: float
    order: float = 2.0
    accuracy: float = 1e-8
    steps: int = 1

    def __post_init__(self):
        if not 0 < self.overlap <= 1:
            raise ValueError("overlap must lie in (0, 1]")
        if not 0 <= self.suppression <= 1:
            raise ValueError("suppression must lie in [0, 1]")
        for name in ("gain", "lobe_width", "bandwidth", "gap", "evolution_constant", "order", "accuracy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ComparisonReport:
    filtering_error: float
    p_rho: float
    cost_ratio_bound: float
    accuracy_ratio: float


def filtering_error_bound(suppression: float, overlap: float, gain: float) -> float:
    """S^2 (1 - A) / (A |L(0)|^2)."""
    if overlap <= 0:
        raise UndefinedOverlapError("overlap A must be positive")
    if gain <= 0:
        raise ValueError("coherent gain must be positive")
    return suppression**2 * (1.0 - overlap) / (overlap * gain**2)


def total_error_bound(
    suppression: float,
    overlap: float,
    gain: float,
    evolution_constant: float,
    steps: int,
    order: float = 2.0,
) -> float:
    """max[C N_t^-q, filtering_error_bound]."""
    return max(evolution_constant * steps ** (-order), filtering_error_bound(suppression, overlap, gain))


def eigenstate_probability(overlap: float, gain: float) -> float:
    """A|L(0)|^2 / (1 + A|L(0)|^2), valid while the filtering error is small."""
    if not 0 <= overlap <= 1:
        raise ValueError("overlap must lie in [0, 1]")
    x = overlap * gain**2
    return x / (1.0 + x)


def resolution_steps(lobe_width: float, bandwidth: float, gap: float) -> float:
    if gap <= 0:
        raise DegenerateSpectrumError("energy gap must be positive")
    return lobe_width * bandwidth / (2.0 * gap)


def accuracy_steps(evolution_constant: float, accuracy: float, order: float) -> float:
    return (evolution_constant / accuracy) ** (1.0 / order)


def minimum_time_steps(
    lobe_width: float,
    bandwidth: float,
    gap: float,
    evolution_constant: float,
    accuracy: float,
    order: float = 2.0,
) -> int:
    """Smallest integer N_t with N_t > max[W B / (2 gap), (C/eps)^(1/q)]."""
    if gap <= 0:
        raise DegenerateSpectrumError("energy gap must be positive")
    for name, value in (("lobe_width", lobe_width), ("bandwidth", bandwidth),
                        ("evolution_constant", evolution_constant), ("accuracy", accuracy),
                        ("order", order)):
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    bound = max(
        resolution_steps(lobe_width, bandwidth, gap),
        accuracy_steps(evolution_constant, accuracy, order),
    )
    return int(math.floor(bound)) + 1


def alt_comparison(
    inputs: AnalysisInputs,
    steps: int,
    steps_alt: int,
    suppression_rect: float,
) -> ComparisonReport:
    """Cost bound (2e/|L(0)|^2)(N_t/N_t_alt) and accuracy ratio S^2/(S_rect^2 |L(0)|^2)."""
    if suppression_rect <= 0 or inputs.gain <= 0:
        raise ValueError("gains and suppressions must be positive")
    return ComparisonReport(
        filtering_error=filtering_error_bound(inputs.suppression, inputs.overlap, inputs.gain),
        p_rho=eigenstate_probability(inputs.overlap, inputs.gain),
        cost_ratio_bound=2.0 * math.e / inputs.gain**2 * steps / steps_alt,
        accuracy_ratio=inputs.suppression**2 / (suppression_rect**2 * inputs.gain**2),
    )


def measured_cost_ratio(steps: int, p_total: float, steps_alt: int, p_alt: float) -> float:
    """(N_t / P_total) / (N_t_alt / P_alt): average operations relative to ALT."""
    return (steps / p_total) / (steps_alt / p_alt)


def fit_power_law(step_counts: Sequence[int], errors: Sequence[float]):
    """Least-squares fit of err = C * N_t^-q in log-log space; returns (C, q)."""
    n = np.log(np.asarray(step_counts, dtype=float))
    e = np.log(np.asarray(errors, dtype=float))
    slope, intercept = np.polyfit(n, e, 1)
    return float(math.exp(intercept)), float(-slope)


def populated_gap(
    energies: np.ndarray,
    amplitudes: np.ndarray,
    target: int,
    population_floor: float = 1e-12,
) -> float:
    """Distance from level ``target`` to the nearest level the trial populates.

    Levels with |a_m|^2 below ``population_floor`` (e.g. the wrong parity) are
    invisible to the filter and do not count.
    """
    energies = np.asarray(energies, dtype=float)
    weights = np.abs(np.asarray(amplitudes)) ** 2
    others = [m for m in range(energies.size) if m != target and weights[m] > population_floor]
    if not others:
        raise DegenerateSpectrumError("no other populated level to compare against")
    gap = float(min(abs(energies[m] - energies[target]) for m in others))
    if gap <= 1e-9 * max(1.0, abs(energies[target])):
        raise DegenerateSpectrumError(f"level {target} is degenerate with a populated level")
    return gap


def evolution_error(prop, eigenstate, total_time: Optional[float] = None) -> float:
    """Largest squared phase-aligned deviation of a propagated eigenstate.

    An exact eigenstate only picks up a phase, so whatever the propagator
    does beyond that is time-discretization error, measured in the same
    metric as the filtering error.
    """
    steps = int(round((total_time or prop.dt) / prop.dt))
    worst = [0.0]

    def track(i, state):
        worst[0] = max(worst[0], state_error(state, eigenstate))

    evolve_trajectory(prop, eigenstate, steps, track)
    return worst[0]


def fit_evolution_constant(grid, potential, eigenstate, total_time: float, step_counts: Sequence[int]):
    """Fit (C, q) of err ~ C N_t^-q from :func:`evolution_error` at each step count."""
    errors = [
        evolution_error(Propagator(grid, potential, total_time / n), eigenstate, total_time)
        for n in step_counts
    ]
    c, q = fit_power_law(step_counts, errors)
    return c, q, errors
