"""Classical reference spectral filter.

The filtered state is the quadrature sum

    Psi_rho = sum_{i=0}^{N_t} B_i Psi_trial(t_i),
    B_i     = u_i w(t_i) exp(i E_rho t_i) / N_t,

accumulated along a single propagated trajectory of the trial state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import GridMismatchError
from .evolution import Propagator, evolve_trajectory
from .numerics import EigenSolution, GridSpec, PotentialSpec, StateVector, inner_product
from .quadrature import QuadratureRule
from .windows import Window

__all__ = [
    "QuadratureRule",
    "TrialSpec",
    "FilterPlan",
    "FilterResult",
    "coefficient",
    "coefficients",
    "classical_filter",
    "mode_amplitudes",
    "align_phase",
    "state_distance",
    "state_error",
]


@dataclass(frozen=True, eq=False)
class TrialSpec:
    """Recipe for the initial trial state.

    ``cos2`` is cos^2(pi x / (2 width)) on [-width, width] and zero outside.
    ``custom-table`` interpolates tabulated (x, re, im) columns onto the grid.
    Either way the sampled state is normalized numerically on the grid.
    """

    kind: str = "cos2"
    width: float = 10.0
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("cos2", "custom-table"):
            raise ValueError(f"unknown trial kind {self.kind!r}")
        if self.kind == "cos2" and not self.width > 0:
            raise ValueError("trial width must be positive")
        if self.kind == "custom-table" and self.table is None:
            raise ValueError("custom-table trial needs a table")

    @classmethod
    def from_state(cls, state: StateVector) -> "TrialSpec":
        x = state.grid.x
        return cls("custom-table", 0.0, np.column_stack([x, state.amplitudes.real, state.amplitudes.imag]))

    def build(self, grid: GridSpec) -> StateVector:
        x = grid.x
        if self.kind == "cos2":
            amps = np.where(np.abs(x) <= self.width, np.cos(0.5 * np.pi * x / self.width) ** 2, 0.0)
        else:
            tab = np.asarray(self.table, dtype=float)
            order = np.argsort(tab[:, 0])
            xs = tab[order, 0]
            amps = np.interp(x, xs, tab[order, 1], left=0.0, right=0.0).astype(complex)
            if tab.shape[1] > 2:
                amps = amps + 1j * np.interp(x, xs, tab[order, 2], left=0.0, right=0.0)
        return StateVector(amps, grid).normalized()


@dataclass(frozen=True, eq=False)
class FilterPlan:
    grid: GridSpec
    potential: PotentialSpec
    trial: TrialSpec
    window: Window
    quadrature: QuadratureRule
    e_target: float
    total_time: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if self.window.steps != self.steps or not np.isclose(self.window.total_time, self.total_time):
            raise ValueError("window is not sampled on the plan's time nodes")
        if self.quadrature.steps != self.steps:
            raise ValueError("quadrature rule does not match the step count")
        if self.potential.grid != self.grid:
            raise ValueError("potential is not sampled on the plan grid")
        b = np.abs(self.coefficients)
        if np.any(b > (1.0 + 1e-12) / self.steps):
            raise ValueError("plan violates |B_i| <= 1/N_t; quadrature weights must not exceed 1")

    @classmethod
    def create(
        cls,
        grid: GridSpec,
        potential: PotentialSpec,
        trial: TrialSpec,
        window: str,
        e_target: float,
        total_time: float,
        steps: int,
        quadrature: Optional[QuadratureRule] = None,
    ) -> "FilterPlan":
        return cls(
            grid=grid,
            potential=potential,
            trial=trial,
            window=Window.named(window, steps, total_time),
            quadrature=quadrature or QuadratureRule.trapezoidal(steps),
            e_target=e_target,
            total_time=total_time,
            steps=steps,
        )

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    @cached_property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return (
            self.quadrature.weights
            * self.window.values
            * np.exp(1j * self.e_target * self.times)
            / self.steps
        )

    @cached_property
    def propagator(self) -> Propagator:
        return Propagator(self.grid, self.potential, self.dt)

    @cached_property
    def trial_state(self) -> StateVector:
        return self.trial.build(self.grid)


def coefficient(plan: FilterPlan, i: int) -> complex:
    if not 0 <= i <= plan.steps:
        raise IndexError(f"coefficient index {i} outside [0, {plan.steps}]")
    return complex(plan.coefficients[i])


def coefficients(plan: FilterPlan) -> np.ndarray:
    return plan.coefficients


@dataclass(frozen=True, eq=False)
class FilterResult:
    filtered: StateVector
    normalized: StateVector
    norm2: float


def classical_filter(plan: FilterPlan, trial: Optional[StateVector] = None) -> FilterResult:
    """One propagated trajectory, accumulating B_i |Psi_trial(t_i)>."""
    s0 = plan.trial_state if trial is None else trial
    b = plan.coefficients
    acc = np.zeros(plan.grid.points, dtype=complex)

    def accumulate(i, state):
        np.add(acc, b[i] * state.amplitudes, out=acc)

    evolve_trajectory(plan.propagator, s0, plan.steps, accumulate)
    filtered = StateVector(acc, plan.grid)
    return FilterResult(filtered, filtered.normalized(), filtered.norm2())


def mode_amplitudes(state: StateVector, eig: EigenSolution) -> np.ndarray:
    """a_m = <phi_m|state> for every eigenstate in ``eig``."""
    if eig.states and eig.states[0].grid != state.grid:
        raise GridMismatchError("state and eigenstates live on different grids")
    return np.conj(eig.matrix()).T @ state.amplitudes * state.grid.dx


def align_phase(state: StateVector, reference: StateVector) -> StateVector:
    """Multiply ``state`` by the global phase bringing it closest to ``reference``."""
    c = inner_product(state, reference)
    if c == 0:
        return state
    return state * (c / abs(c))


def state_distance(state: StateVector, reference: StateVector) -> float:
    """min over theta of ||e^{i theta} state - reference||."""
    return (align_phase(state, reference) - reference).norm()


def state_error(state: StateVector, reference: StateVector) -> float:
    """Filtering error: the squared phase-aligned distance between normalized states."""
    return state_distance(state.normalized(), reference.normalized()) ** 2
