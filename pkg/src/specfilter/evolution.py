"""Second-order split-operator propagation of the 1-D Schrodinger equation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GridMismatchError
from .numerics import GridSpec, PotentialSpec, StateVector

__all__ = ["PotentialSpec", "Propagator", "step", "evolve_trajectory"]


@dataclass(frozen=True, eq=False)
class Propagator:
    """Strang splitting ``e^{-i dt V/2} F^-1 e^{-i dt p^2/2} F e^{-i dt V/2}``.

    Phase tables are built once; :meth:`advance` is the hot loop and works
    on raw amplitude arrays.
    """

    grid: GridSpec
    potential: PotentialSpec
    dt: float
    half_potential: np.ndarray = field(init=False, repr=False)
    kinetic: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.potential.grid != self.grid:
            raise GridMismatchError("potential and propagator grids differ")
        object.__setattr__(self, "half_potential", np.exp(-0.5j * self.dt * self.potential.values))
        object.__setattr__(self, "kinetic", np.exp(-0.5j * self.dt * self.grid.momenta**2))

    def advance(self, psi: np.ndarray) -> np.ndarray:
        hv = self.half_potential
        return hv * np.fft.ifft(self.kinetic * np.fft.fft(hv * psi))

    def step(self, s: StateVector) -> StateVector:
        if s.grid != self.grid:
            raise GridMismatchError("state and propagator grids differ")
        return StateVector(self.advance(s.amplitudes), self.grid)


def step(prop: Propagator, s: StateVector) -> StateVector:
    return prop.step(s)


def evolve_trajectory(
    prop: Propagator,
    s0: StateVector,
    steps: int,
    callback: Optional[Callable[[int, StateVector], None]] = None,
) -> StateVector:
    """Advance ``s0`` by ``steps`` time steps.

    ``callback(i, state)`` sees every node t_i = i*dt for i = 0..steps,
    including the initial state, which is what a quadrature sum over the
    trajectory needs.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if s0.grid != prop.grid:
        raise GridMismatchError("state and propagator grids differ")
    psi = s0.amplitudes
    if callback is not None:
        callback(0, s0)
    for i in range(1, steps + 1):
        psi = prop.advance(psi)
        if callback is not None:
            callback(i, StateVector(psi, prop.grid))
    return StateVector(psi, prop.grid) if steps else s0
