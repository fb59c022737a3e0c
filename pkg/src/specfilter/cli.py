"""``specfilter`` command-line driver.

    specfilter <spectrum|filter|plan|montecarlo> --config PATH
               [--seed U64] [--jobs N] [--out DIR] [--trials N]

Exit codes: 0 ok, 2 config, 3 numerical, 4 internal invariant,
5 degenerate spectrum.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import analysis
from .circuit import (
    RestartBudgetExceeded,
    asymptotic_success_bound,
    run_circuit,
    success_probability_bound,
)
from .config import RunConfig, load_config
from .errors import ConfigError, InvariantError, SpecFilterError
from .filtering import (
    FilterPlan,
    classical_filter,
    mode_amplitudes,
    state_distance,
    state_error,
)
from .numerics import EigenSolution, diagonalize_hamiltonian
from .spectrum import (
    autocorrelation,
    power_spectrum,
    write_peaks_csv,
    write_spectrum_csv,
)
from .windows import first_minimum, line_shape, line_shape_report, suppression_factor

EQUIVALENCE_TOL = 1e-10


@dataclass
class RunReport:
    epsilon: float
    epsilon_norm: float
    overlap: float
    target_level: int
    target_energy: float
    p_rho: float
    p_success: float
    p_total: float
    success_bound: float
    success_bound_asymptotic: float
    filtering_error_bound: float
    coherent_gain: float
    suppression: float
    gap: float
    steps: int
    dt: float
    window: str
    equivalence: float
    files: Dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


@dataclass
class Oracle:
    eig: EigenSolution
    amplitudes: np.ndarray
    target: int

    @property
    def energy(self) -> float:
        return float(self.eig.energies[self.target])

    @property
    def state(self):
        return self.eig.states[self.target]

    @property
    def overlap(self) -> float:
        return float(abs(self.amplitudes[self.target]) ** 2)

    def gap(self) -> float:
        return analysis.populated_gap(self.eig.energies, self.amplitudes, self.target)


def build_oracle(plan: FilterPlan, count: int = 32) -> Oracle:
    count = min(count, plan.grid.points)
    eig = diagonalize_hamiltonian(plan.grid, plan.potential, count)
    amps = mode_amplitudes(plan.trial_state, eig)
    target = int(np.argmin(np.abs(eig.energies - plan.e_target)))
    return Oracle(eig, amps, target)


def _out_dir(config: RunConfig) -> Path:
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_filter(config: RunConfig) -> RunReport:
    """Classical filter and circuit run, cross-checked, plus the report."""
    plan = config.plan()
    oracle = build_oracle(plan, config["eigen_count"])
    classical = classical_filter(plan)
    circuit = run_circuit(plan, config["mode"], np.random.default_rng(config["seed"]), config["max_restarts"])
    equivalence = state_distance(circuit.state, classical.normalized)
    if not equivalence <= EQUIVALENCE_TOL:
        raise InvariantError(f"circuit and classical filter disagree by {equivalence:.3e}")

    gap = oracle.gap()
    gain = abs(line_shape(plan.window, 0.0, plan.quadrature))
    suppression = _suppression(plan, oracle, gap)
    report = RunReport(
        epsilon=state_error(classical.normalized, oracle.state),
        epsilon_norm=state_distance(classical.normalized, oracle.state),
        overlap=oracle.overlap,
        target_level=oracle.target,
        target_energy=oracle.energy,
        p_rho=circuit.p_rho,
        p_success=circuit.p_success,
        p_total=circuit.p_total,
        success_bound=success_probability_bound(plan.steps),
        success_bound_asymptotic=asymptotic_success_bound(plan.steps),
        filtering_error_bound=analysis.filtering_error_bound(suppression, oracle.overlap, gain),
        coherent_gain=gain,
        suppression=suppression,
        gap=gap,
        steps=plan.steps,
        dt=plan.dt,
        window=plan.window.kind,
        equivalence=equivalence,
    )
    out = _out_dir(config)
    state_path = out / "state.csv"
    with state_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "re_psi", "im_psi"])
        for x, a in zip(plan.grid.x, classical.normalized.amplitudes):
            writer.writerow([repr(float(x)), repr(float(a.real)), repr(float(a.imag))])
    report.files = {"report": "report.json", "state": "state.csv"}
    (out / "report.json").write_text(report.to_json())
    return report


def _suppression(plan: FilterPlan, oracle: Oracle, gap: float) -> float:
    """Suppression over |dE| >= gap; falls back to the populated levels
    themselves when the gap sits inside the main lobe."""
    if gap >= first_minimum(plan.window, plan.quadrature):
        return suppression_factor(plan.window, gap, plan.quadrature)
    populated = np.abs(oracle.amplitudes) ** 2 > 1e-12
    populated[oracle.target] = False
    offsets = oracle.energy - oracle.eig.energies[populated]
    return float(np.abs(line_shape(plan.window, offsets, plan.quadrature)).max())


def cmd_spectrum(config: RunConfig) -> Dict[str, Path]:
    plan = config.plan()
    spec_window = config.window("spectrum_window")
    mode = config["autocorrelation"]
    padding = config["padding"]
    threshold = config["peak_threshold"]

    trial_ac = autocorrelation(plan.propagator, plan.trial_state, plan.steps, mode)
    trial_sp = power_spectrum(trial_ac, spec_window, plan.quadrature, padding, threshold)
    filtered = classical_filter(plan).normalized
    filt_ac = autocorrelation(plan.propagator, filtered, plan.steps, mode)
    filt_sp = power_spectrum(filt_ac, spec_window, plan.quadrature, padding, threshold)

    out = _out_dir(config)
    files = {
        "trial": write_spectrum_csv(out / "spectrum_trial.csv", trial_sp),
        "filtered": write_spectrum_csv(out / "spectrum_filtered.csv", filt_sp),
        "peaks": write_peaks_csv(
            out / "peaks.csv",
            [("trial", p) for p in trial_sp.peaks] + [("filtered", p) for p in filt_sp.peaks],
        ),
    }
    return files


def cmd_plan(config: RunConfig, stream=None) -> Dict[str, float]:
    stream = stream or sys.stdout
    plan = config.plan()
    oracle = build_oracle(plan, config["eigen_count"])
    gap = oracle.gap()
    report = line_shape_report(plan.window, None, plan.quadrature)
    width = report.lobe_width
    bandwidth = 2.0 * math.pi / plan.dt

    c = config.get("evolution_constant")
    q = config.get("evolution_order")
    if c is None:
        counts = [max(8, plan.steps // 8), max(16, plan.steps // 4), max(32, plan.steps // 2)]
        c_fit, q_fit, _ = analysis.fit_evolution_constant(
            plan.grid, plan.potential, oracle.state, plan.total_time, counts
        )
        c = c_fit
        q = q if q is not None else q_fit
    q = 2.0 if q is None else q
    accuracy = config["accuracy"]
    recommended = analysis.minimum_time_steps(width, bandwidth, gap, c, accuracy, q)
    result = {
        "target_energy": oracle.energy,
        "gap": gap,
        "lobe_width": width,
        "bandwidth": bandwidth,
        "dt": plan.dt,
        "resolution_steps": analysis.resolution_steps(width, bandwidth, gap),
        "accuracy_steps": analysis.accuracy_steps(c, accuracy, q),
        "evolution_constant": c,
        "evolution_order": q,
        "recommended_steps": recommended,
        "probability_floor": success_probability_bound(plan.steps),
        "probability_floor_asymptotic": asymptotic_success_bound(plan.steps),
        "probability_floor_recommended": success_probability_bound(recommended),
        "limit_probability_floor": math.exp(-1.0),
    }
    for key, value in result.items():
        print(f"{key} = {value!r}", file=stream)
    return result


def _montecarlo_trials(plan: FilterPlan, seed: int, trials: int, indices, max_restarts: int):
    seeds = np.random.SeedSequence(seed).spawn(trials)
    rows = []
    for k in indices:
        rng = np.random.default_rng(seeds[k])
        exceeded = False
        try:
            stats = run_circuit(plan, "sampled", rng, max_restarts).stats
        except RestartBudgetExceeded as exc:
            stats, exceeded = exc.stats, True
        attempts = stats.attempts
        rows.append(
            {
                "trial": k,
                "attempts": len(attempts),
                "filtering_attempts": stats.filtering_attempts,
                "first_attempt_success": int(attempts[0].outcome != "gate-failure"),
                "gate_failures": stats.gate_failures,
                "projection_failures": sum(a.outcome == "projection-failure" for a in attempts),
                "budget_exceeded": int(exceeded),
            }
        )
    return rows


def montecarlo(plan: FilterPlan, trials: int, seed: int, jobs: int = 1, max_restarts: int = 1000):
    """Sampled-mode trials, fanned out over ``jobs`` processes, merged by index."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    indices = list(range(trials))
    if jobs <= 1:
        rows = _montecarlo_trials(plan, seed, trials, indices, max_restarts)
    else:
        chunks = [indices[j::jobs] for j in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(
                _montecarlo_trials,
                [plan] * jobs,
                [seed] * jobs,
                [trials] * jobs,
                chunks,
                [max_restarts] * jobs,
            )
            rows = sorted((r for part in parts for r in part), key=lambda r: r["trial"])

    deterministic = run_circuit(plan)
    n = len(rows)
    successes = sum(r["first_attempt_success"] for r in rows)
    p_hat = successes / n
    se = math.sqrt(max(deterministic.p_success * (1 - deterministic.p_success), 1e-300) / n)
    filt = np.array([r["filtering_attempts"] for r in rows], dtype=float)
    total = np.array([r["attempts"] for r in rows], dtype=float)
    summary = {
        "trials": n,
        "seed": seed,
        "steps": plan.steps,
        "empirical_p_success": p_hat,
        "deterministic_p_success": deterministic.p_success,
        "binomial_standard_error": se,
        "z_score": (p_hat - deterministic.p_success) / se,
        "ci95_low": max(0.0, p_hat - 1.96 * math.sqrt(p_hat * (1 - p_hat) / n)),
        "ci95_high": min(1.0, p_hat + 1.96 * math.sqrt(p_hat * (1 - p_hat) / n)),
        "mean_filtering_attempts": float(filt.mean()),
        "filtering_attempts_standard_error": float(filt.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "mean_attempts": float(total.mean()),
        "mean_restarts": float(total.mean() - 1.0),
        "budget_exceeded": sum(r["budget_exceeded"] for r in rows),
        "deterministic_p_total": deterministic.p_total,
    }
    return rows, summary


def cmd_montecarlo(config: RunConfig, trials: Optional[int] = None) -> Dict[str, Path]:
    plan = config.plan()
    rows, summary = montecarlo(
        plan,
        trials or config["trials"],
        config["seed"],
        config["jobs"],
        config["max_restarts"],
    )
    out = _out_dir(config)
    trials_path = out / "montecarlo_trials.csv"
    with trials_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    summary_path = out / "montecarlo_summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return {"trials": trials_path, "summary": summary_path}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specfilter", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=["spectrum", "filter", "plan", "montecarlo"])
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--seed", type=int, help="64-bit random seed")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--trials", type=int)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        config = load_config(args.config).with_overrides(
            seed=args.seed, jobs=args.jobs, out=str(args.out) if args.out else None
        )
        if args.command == "filter":
            report = cmd_filter(config)
            print(report.to_json(), end="")
        elif args.command == "spectrum":
            for name, path in cmd_spectrum(config).items():
                print(f"{name} = {path}")
        elif args.command == "plan":
            cmd_plan(config)
        else:
            for name, path in cmd_montecarlo(config, args.trials).items():
                print(f"{name} = {path}")
    except SpecFilterError as exc:
        print(f"specfilter: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"specfilter: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
