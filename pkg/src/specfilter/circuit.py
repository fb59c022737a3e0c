"""Simulation of the two-ancilla filtering circuit.

The register ``|c> (x) |psi>`` is carried as two grid vectors, one per value
of the control qubit ``c``:

    (|0> branch0 + |1> branch1) / N_{i},     N_i^2 = 1 + ||branch1||^2.

branch0 holds the evolving trial state, branch1 the partial filter sum.
Each non-unitary gate

    B_i = k_i [[1, 0], [B_i, 1]]

is realized as ``U diag(1, s) V^dagger`` where the ``diag(1, s)`` factor
needs a second ancilla, a controlled rotation with cos(theta) = s, and a
projective measurement onto ancilla |0>. That ancilla is measured straight
away, so only its outcome probabilities are tracked, never its amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvariantError, RestartBudgetExceeded
from .evolution import Propagator
from .filtering import FilterPlan
from .numerics import StateVector

PROBABILITY_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class GateFactors:
    """Closed-form SVD of the normalized gate for one coefficient B.

    F and G are evaluated at |B|; the phase of B enters through
    D = diag(1, e^{i phi}) as U = D U', V^dagger = V'^dagger D^*, which keeps
    both factors exactly unitary.
    """

    coefficient: complex
    phase: float
    prefactor: float
    singular: float
    f_plus: float
    f_minus: float
    g_plus: float
    g_minus: float
    u: np.ndarray
    v_dagger: np.ndarray

    @property
    def angle(self) -> float:
        return math.acos(min(1.0, self.singular))

    def gate(self) -> np.ndarray:
        """The normalized 2x2 gate k * [[1, 0], [B, 1]]."""
        return self.prefactor * np.array([[1.0, 0.0], [self.coefficient, 1.0]], dtype=complex)

    def reconstruct(self) -> np.ndarray:
        return self.u @ np.diag([1.0, self.singular]) @ self.v_dagger


def gate_factors(b: complex) -> GateFactors:
    b = complex(b)
    mag = abs(b)
    if not math.isfinite(mag):
        raise ValueError(f"non-finite gate coefficient {b}")
    root = math.sqrt(1.0 + 0.25 * mag * mag)
    f_plus = 0.5 * mag + root
    f_minus = 0.5 * mag - root
    g_plus = 1.0 + 0.5 * mag * mag + mag * root
    g_minus = 1.0 + 0.5 * mag * mag - mag * root
    prefactor = 1.0 / math.sqrt(g_plus)
    singular = math.sqrt(g_minus / g_plus)

    n_plus = math.hypot(f_plus, g_plus)
    n_minus = math.hypot(f_minus, g_minus)
    u_real = np.array([[f_plus / n_plus, f_minus / n_minus], [g_plus / n_plus, g_minus / n_minus]])
    m_plus = math.hypot(f_plus, 1.0)
    m_minus = math.hypot(f_minus, 1.0)
    v_real = np.array([[f_plus / m_plus, 1.0 / m_plus], [f_minus / m_minus, 1.0 / m_minus]])

    phase = math.atan2(b.imag, b.real) if mag > 0 else 0.0
    d = np.array([1.0, np.exp(1j * phase)])
    u = d[:, None] * u_real
    v_dagger = v_real * np.conj(d)[None, :]
    return GateFactors(
        coefficient=b,
        phase=phase,
        prefactor=prefactor,
        singular=singular,
        f_plus=f_plus,
        f_minus=f_minus,
        g_plus=g_plus,
        g_minus=g_minus,
        u=u,
        v_dagger=v_dagger,
    )


def p1_bound(b: complex) -> float:
    """Largest possible p_1 over all partial-sum norms: 1 / (1 + (F^-)^2)."""
    f_minus = gate_factors(b).f_minus
    return 1.0 / (1.0 + f_minus * f_minus)


def p1_value(b: complex, partial_norm2: float) -> float:
    """p_1 with the trial/partial-sum cross term neglected.

    (|V21|^2 + |V22|^2 n^2) / (1 + n^2) for n^2 = ||Psi_rho^(i-1)||^2.
    """
    vd = gate_factors(b).v_dagger
    return (abs(vd[1, 0]) ** 2 + abs(vd[1, 1]) ** 2 * partial_norm2) / (1.0 + partial_norm2)


def success_probability_bound(steps: int) -> float:
    """Lower bound on the product of N_t + 1 gate success probabilities."""
    x = 1.0 / (4.0 * steps * steps)
    r = math.sqrt(1.0 + x) / (2.0 * steps)
    return ((1.0 + x - r) / (1.0 + x + r)) ** (steps + 1)


def asymptotic_success_bound(steps: int) -> float:
    """Large-N_t form of :func:`success_probability_bound`."""
    return math.exp(-1.0) * (1.0 - 1.0 / steps)


@dataclass(frozen=True, eq=False)
class DualRegisterState:
    """Control-qubit branches plus the running probability ledger.

    ``norm2`` is N_i^2 = ||branch0||^2 + ||branch1||^2 for the current step.
    """

    branch0: StateVector
    branch1: StateVector
    norm2: float = 1.0
    success: float = 1.0
    failures: tuple = ()
    failed: bool = False

    @classmethod
    def initial(cls, trial: StateVector) -> "DualRegisterState":
        zero = StateVector(np.zeros_like(trial.amplitudes), trial.grid)
        return cls(trial, zero, trial.norm2(), 1.0, ())


def _split(b0: np.ndarray, b1: np.ndarray, norm2: float, factors: GateFactors, dx: float):
    """V^dagger on the c-label; returns (psi0, psi1, p_failure)."""
    vd = factors.v_dagger
    psi0 = vd[0, 0] * b0 + vd[0, 1] * b1
    psi1 = vd[1, 0] * b0 + vd[1, 1] * b1
    s = factors.singular
    weight1 = float(np.vdot(psi1, psi1).real * dx)
    p_failure = weight1 * (1.0 - s * s) / norm2
    if p_failure < -PROBABILITY_SLACK or p_failure > 1.0 + PROBABILITY_SLACK:
        raise InvariantError(f"failure probability {p_failure} outside [0, 1]")
    return psi0, psi1, min(max(p_failure, 0.0), 1.0)


def _recombine(psi0, psi1, factors: GateFactors, dx: float, norm2: float, p_failure: float):
    """Ancilla |0> branch (psi0, s*psi1), then U; rescaled so branch0 keeps its norm."""
    u = factors.u
    scaled = factors.singular * psi1
    inv = 1.0 / factors.prefactor
    new0 = (u[0, 0] * psi0 + u[0, 1] * scaled) * inv
    new1 = (u[1, 0] * psi0 + u[1, 1] * scaled) * inv
    new_norm2 = float((np.vdot(new0, new0).real + np.vdot(new1, new1).real) * dx)

    # success probability from the ledger must agree with 1 - p_failure
    ledger = factors.prefactor**2 * new_norm2 / norm2
    if abs(ledger - (1.0 - p_failure)) > PROBABILITY_SLACK:
        raise InvariantError(
            f"gate ledger mismatch: k^2 N_i^2/N_(i-1)^2 = {ledger}, 1 - p_fail = {1 - p_failure}"
        )
    return new0, new1, new_norm2


def apply_filter_gate(
    state: DualRegisterState,
    factors: GateFactors,
    mode: str = "deterministic",
    rng=None,
):
    """Apply one non-unitary gate; returns ``(state', p_failure, outcome)``.

    ``outcome`` is None in deterministic mode (the ancilla is post-selected
    on |0>), otherwise ``"success"`` or ``"failure"``. After a failure the
    returned state is flagged and its branches are left untouched; the run
    must restart from t = 0.
    """
    if mode not in ("deterministic", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and rng is None:
        raise ValueError("sampled mode needs a random generator")
    grid = state.branch0.grid
    psi0, psi1, p_failure = _split(
        state.branch0.amplitudes, state.branch1.amplitudes, state.norm2, factors, grid.dx
    )

    outcome = None
    if mode == "sampled":
        outcome = "failure" if rng.random() < p_failure else "success"
        if outcome == "failure":
            failed = DualRegisterState(
                state.branch0,
                state.branch1,
                state.norm2,
                state.success * p_failure,
                state.failures + (p_failure,),
                failed=True,
            )
            return failed, p_failure, outcome

    new0, new1, norm2 = _recombine(psi0, psi1, factors, grid.dx, state.norm2, p_failure)
    new_state = DualRegisterState(
        StateVector(new0, grid),
        StateVector(new1, grid),
        norm2,
        state.success * (1.0 - p_failure),
        state.failures + (p_failure,),
    )
    return new_state, p_failure, outcome


def controlled_evolution(state: DualRegisterState, prop: Propagator) -> DualRegisterState:
    """One time step on the c = |0> branch; branch1 is left as is."""
    return DualRegisterState(
        prop.step(state.branch0),
        state.branch1,
        state.norm2,
        state.success,
        state.failures,
        state.failed,
    )


@dataclass
class AttemptRecord:
    outcome: str  # "success", "gate-failure" or "projection-failure"
    failed_step: Optional[int] = None


@dataclass
class MonteCarloStats:
    attempts: List[AttemptRecord] = field(default_factory=list)

    @property
    def restarts(self) -> int:
        return max(0, len(self.attempts) - 1)

    @property
    def gate_failures(self) -> int:
        return sum(a.outcome == "gate-failure" for a in self.attempts)

    @property
    def filtering_attempts(self) -> int:
        """Attempts up to and including the first one whose gates all passed."""
        for k, a in enumerate(self.attempts):
            if a.outcome != "gate-failure":
                return k + 1
        return len(self.attempts)

    @property
    def empirical_success(self) -> float:
        if not self.attempts:
            return float("nan")
        return 1.0 - self.gate_failures / len(self.attempts)


@dataclass(frozen=True, eq=False)
class CircuitReport:
    state: StateVector
    filtered: StateVector
    p_rho: float
    p_success: float
    failure_probabilities: np.ndarray
    success_bound: float
    mode: str
    stats: Optional[MonteCarloStats] = None

    @property
    def p_total(self) -> float:
        return self.p_rho * self.p_success

    @property
    def cumulative_success(self) -> np.ndarray:
        return np.cumprod(1.0 - self.failure_probabilities)


def _sweep(plan: FilterPlan, factors: List[GateFactors], mode: str, rng):
    """Gate B_0, then (evolve, gate B_i) for i = 1..N_t.

    Same arithmetic as :func:`apply_filter_gate` and
    :func:`controlled_evolution`, run on bare arrays for speed. Returns
    (branch1, N^2, failure probabilities, failed step or None).
    """
    prop = plan.propagator
    dx = plan.grid.dx
    b0 = plan.trial_state.amplitudes
    b1 = np.zeros_like(b0)
    norm2 = plan.trial_state.norm2()
    failures = np.empty(plan.steps + 1)
    for i, f in enumerate(factors):
        if i:
            b0 = prop.advance(b0)
        psi0, psi1, p_fail = _split(b0, b1, norm2, f, dx)
        failures[i] = p_fail
        if mode == "sampled" and rng.random() < p_fail:
            return b1, norm2, failures[: i + 1], i
        b0, b1, norm2 = _recombine(psi0, psi1, f, dx, norm2, p_fail)
    return b1, norm2, failures, None


def run_circuit(
    plan: FilterPlan,
    mode: str = "deterministic",
    rng=None,
    max_restarts: int = 1000,
) -> CircuitReport:
    """Run the full filtering circuit and the final |1><1| projection.

    Deterministic mode post-selects every ancilla outcome and reports exact
    probabilities. Sampled mode draws each measurement from ``rng`` and
    restarts from t = 0 on any failure (gate or final projection) until a
    full success or ``max_restarts`` restarts.
    """
    if mode not in ("deterministic", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and rng is None:
        raise ValueError("sampled mode needs a random generator")
    stats = MonteCarloStats() if mode == "sampled" else None
    factors = [gate_factors(b) for b in plan.coefficients]
    while True:
        amps, norm2, failures, failed_at = _sweep(plan, factors, mode, rng)
        if failed_at is None:
            branch1 = StateVector(amps, plan.grid)
            p_rho = branch1.norm2() / norm2
            if mode == "sampled":
                if rng.random() < p_rho:
                    stats.attempts.append(AttemptRecord("success"))
                    break
                stats.attempts.append(AttemptRecord("projection-failure"))
            else:
                break
        else:
            stats.attempts.append(AttemptRecord("gate-failure", failed_at))
        if stats.restarts >= max_restarts:
            raise RestartBudgetExceeded(
                f"no full success after {max_restarts} restarts", stats
            )

    if branch1.norm2() == 0.0:
        raise InvariantError("filter produced the zero state")
    p_success = float(np.prod(1.0 - failures))
    return CircuitReport(
        state=branch1.normalized(),
        filtered=branch1,
        p_rho=p_rho,
        p_success=p_success,
        failure_probabilities=failures,
        success_bound=success_probability_bound(plan.steps),
        mode=mode,
        stats=stats,
    )
