"""Grids, grid-sampled states, the DFT convention and a dense eigensolver.

All wave functions live on a uniform periodic grid ``x_j = -L/2 + j*dx`` with
``dx = L/N``. Norms include the ``dx`` measure, so a normalized state
satisfies ``sum(|psi_j|^2) * dx == 1`` independently of the resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
import scipy.linalg

from .errors import GridMismatchError, NumericalError

NORMALIZED_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform 1-D grid of ``points`` nodes over a box of size ``length``."""

    length: float
    points: int

    def __post_init__(self):
        if self.points < 4 or self.points & (self.points - 1):
            raise ValueError(f"grid points must be a power of two >= 4, got {self.points}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.points

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.points)

    @cached_property
    def momenta(self) -> np.ndarray:
        """Momentum grid in standard DFT ordering, covering [-pi/dx, pi/dx)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes sampled on a grid."""

    amplitudes: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.points,):
            raise GridMismatchError(
                f"expected {self.grid.points} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "StateVector":
        return cls(func(grid.x), grid)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real * self.grid.dx)

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise NumericalError("cannot normalize the zero state")
        return StateVector(self.amplitudes / n, self.grid)

    def is_normalized(self, tol: float = NORMALIZED_TOL) -> bool:
        return abs(self.norm2() - 1.0) < tol

    def _check(self, other: "StateVector"):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "StateVector") -> "StateVector":
        self._check(other)
        return StateVector(self.amplitudes + other.amplitudes, self.grid)

    def __sub__(self, other: "StateVector") -> "StateVector":
        self._check(other)
        return StateVector(self.amplitudes - other.amplitudes, self.grid)

    def __mul__(self, scalar: complex) -> "StateVector":
        return StateVector(self.amplitudes * scalar, self.grid)

    __rmul__ = __mul__

    def __neg__(self) -> "StateVector":
        return StateVector(-self.amplitudes, self.grid)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """Grid quadrature of <a|b>, conjugate-linear in ``a``."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dx)


def dft_forward(s: StateVector) -> StateVector:
    """Unitary DFT; bin k corresponds to ``s.grid.momenta[k]``."""
    return StateVector(np.fft.fft(s.amplitudes, norm="ortho"), s.grid)


def dft_inverse(s: StateVector) -> StateVector:
    return StateVector(np.fft.ifft(s.amplitudes, norm="ortho"), s.grid)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Real potential sampled on the grid, in units of hbar*omega."""

    kind: str
    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.points,):
            raise GridMismatchError(
                f"potential has shape {vals.shape}, grid has {self.grid.points} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def harmonic(cls, grid: GridSpec, omega: float = 1.0) -> "PotentialSpec":
        return cls("harmonic", 0.5 * omega**2 * grid.x**2, grid)

    @classmethod
    def free(cls, grid: GridSpec) -> "PotentialSpec":
        return cls("custom-table", np.zeros(grid.points), grid)

    @classmethod
    def from_table(cls, grid: GridSpec, x_table, v_table) -> "PotentialSpec":
        """Linearly interpolate a tabulated ``V(x)`` onto the grid nodes."""
        x_table = np.asarray(x_table, dtype=float)
        order = np.argsort(x_table)
        values = np.interp(grid.x, x_table[order], np.asarray(v_table, dtype=float)[order])
        return cls("custom-table", values, grid)


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Lowest eigenpairs of a grid Hamiltonian, ascending in energy."""

    energies: np.ndarray
    states: list

    def __len__(self):
        return len(self.energies)

    def matrix(self) -> np.ndarray:
        """States as columns of an ``N x count`` array."""
        return np.stack([s.amplitudes for s in self.states], axis=1)


def kinetic_matrix(grid: GridSpec) -> np.ndarray:
    """Dense spectral representation of p^2/2, i.e. F^-1 diag(p^2/2) F.

    Real symmetric: the lone Nyquist mode contributes (-1)^(j-k), which is real.
    """
    n = grid.points
    columns = np.fft.ifft(0.5 * grid.momenta[:, None] ** 2 * np.fft.fft(np.eye(n), axis=0), axis=0)
    k = columns.real
    return 0.5 * (k + k.T)


def hamiltonian_matrix(grid: GridSpec, potential: Union[PotentialSpec, np.ndarray]) -> np.ndarray:
    values = potential.values if isinstance(potential, PotentialSpec) else np.asarray(potential)
    if values.shape != (grid.points,):
        raise GridMismatchError("potential does not match grid")
    h = kinetic_matrix(grid)
    h[np.diag_indices_from(h)] += values
    return h


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive."""
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def diagonalize_hamiltonian(
    grid: GridSpec, potential: Union[PotentialSpec, np.ndarray], count: int
) -> EigenSolution:
    """Lowest ``count`` eigenpairs of the spectral-kinetic grid Hamiltonian.

    The kinetic term shares its discretization with the split-operator
    propagator, so eigenstates returned here are the exact references the
    propagated filters converge to (up to time-step error).
    """
    if not 1 <= count <= grid.points:
        raise ValueError(f"count must be in [1, {grid.points}], got {count}")
    h = hamiltonian_matrix(grid, potential)
    try:
        energies, vectors = scipy.linalg.eigh(h, subset_by_index=[0, count - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"dense eigensolve failed: {exc}") from exc
    if not np.all(np.isfinite(energies)):
        raise NumericalError("eigensolver returned non-finite energies")
    scale = 1.0 / np.sqrt(grid.dx)
    states = [StateVector(fix_phase(vectors[:, m].astype(complex)) * scale, grid) for m in range(count)]
    return EigenSolution(np.asarray(energies), states)
