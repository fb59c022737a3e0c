"""Spectral-filtering state preparation, simulated classically.

A trial wave function is propagated with a split-operator scheme, filtered
through an apodization window around a target energy, and the same filter
is realized as a two-ancilla post-selected circuit.
"""

from .circuit import gate_factors, p1_bound, run_circuit, success_probability_bound
from .evolution import Propagator, evolve_trajectory
from .filtering import FilterPlan, TrialSpec, classical_filter, mode_amplitudes, state_error
from .numerics import GridSpec, PotentialSpec, StateVector, diagonalize_hamiltonian, inner_product
from .quadrature import QuadratureRule
from .windows import Window, line_shape, suppression_factor

__version__ = "0.1.0"
