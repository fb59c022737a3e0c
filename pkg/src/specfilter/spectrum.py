"""Autocorrelation functions and windowed power spectra.

c(t_i) = <Psi(0)|Psi(t_i)> is either computed directly or obtained by
emulating the one-ancilla Hadamard-test circuit, and

    C(E) = (1/N_t) * sum_i u_i w(t_i) exp(i E t_i) c(t_i)

is evaluated on a zero-padded energy grid covering [-pi/dt, pi/dt).

Note on the Hadamard test: for (|0>Psi(0) + |1>Psi(t))/sqrt(2) the ancilla
expectations are <sigma_x> = Re c(t) and <sigma_y> = Im c(t), without a
factor of two; the direct overlap is the reference for that constant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Union

import numpy as np

from .evolution import Propagator, evolve_trajectory
from .numerics import StateVector, inner_product
from .quadrature import QuadratureRule
from .windows import Window, line_shape


@dataclass(frozen=True, eq=False)
class AutocorrSeries:
    times: np.ndarray
    values: np.ndarray
    provenance: str = "direct-overlap"

    @property
    def steps(self) -> int:
        return self.times.size - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


class Peak(NamedTuple):
    energy: float
    height: float


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    """C(E) on an ascending energy grid.

    ``leakage`` optionally maps an energy offset to |L(offset)|/|L(0)| for
    the analysis window; :func:`detect_peaks` uses it to discard side lobes.
    """

    energies: np.ndarray
    values: np.ndarray
    peaks: List[Peak] = field(default_factory=list)
    leakage: Optional[Callable] = field(default=None, repr=False)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def bandwidth(self) -> float:
        return float(self.energies.size * (self.energies[1] - self.energies[0]))


def _hadamard_test(s0: np.ndarray, st: np.ndarray, dx: float) -> complex:
    """<sigma_x> + i <sigma_y> on the ancilla of (|0>s0 + |1>st)/sqrt(2)."""
    a0 = s0 / np.sqrt(2.0)
    a1 = st / np.sqrt(2.0)
    # sigma_x swaps the branches; sigma_y swaps them with phases -i, +i
    sx = (np.vdot(a0, a1) + np.vdot(a1, a0)) * dx
    sy = (np.vdot(a0, -1j * a1) + np.vdot(a1, 1j * a0)) * dx
    return complex(sx.real, sy.real)


def autocorrelation(
    prop: Propagator,
    s0: StateVector,
    steps: int,
    mode: str = "direct",
) -> AutocorrSeries:
    if mode not in ("direct", "circuit"):
        raise ValueError(f"unknown autocorrelation mode {mode!r}")
    values = np.empty(steps + 1, dtype=complex)
    ref = s0.amplitudes
    dx = s0.grid.dx

    if mode == "direct":
        def record(i, state):
            values[i] = inner_product(s0, state)
    else:
        def record(i, state):
            values[i] = _hadamard_test(ref, state.amplitudes, dx)

    evolve_trajectory(prop, s0, steps, record)
    provenance = "direct-overlap" if mode == "direct" else "circuit-emulated"
    return AutocorrSeries(prop.dt * np.arange(steps + 1), values, provenance)


def power_spectrum(
    ac: AutocorrSeries,
    window: Window,
    quadrature: Optional[QuadratureRule] = None,
    padding: int = 4,
    threshold: Optional[float] = None,
) -> SpectrumSeries:
    """Windowed transform of ``ac`` on M = padding * (N_t + 1) energies.

    Energies are returned ascending over [-pi/dt, pi/dt). Peaks are
    detected when ``threshold`` is given.
    """
    if window.steps != ac.steps:
        raise ValueError("window and autocorrelation are sampled on different nodes")
    q = quadrature or QuadratureRule.trapezoidal(ac.steps)
    f = q.weights * window.values * ac.values / ac.steps
    m = padding * f.size
    values = np.fft.fftshift(m * np.fft.ifft(f, n=m))
    energies = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(m, d=ac.dt))
    gain = abs(line_shape(window, 0.0, q))

    def leakage(offsets):
        return np.abs(line_shape(window, offsets, q)) / gain

    sp = SpectrumSeries(energies, values, leakage=leakage)
    if threshold is not None:
        sp = SpectrumSeries(energies, values, detect_peaks(sp, threshold), leakage)
    return sp


def spectrum_at(ac: AutocorrSeries, window: Window, energies, quadrature=None) -> np.ndarray:
    """Direct evaluation of C(E) at arbitrary energies."""
    q = quadrature or QuadratureRule.trapezoidal(ac.steps)
    f = q.weights * window.values * ac.values / ac.steps
    e = np.atleast_1d(np.asarray(energies, dtype=float))
    return np.exp(1j * np.multiply.outer(e, ac.times)) @ f


def detect_peaks(sp: SpectrumSeries, threshold: float, leakage_margin: float = 2.0) -> List[Peak]:
    """Local maxima of |C| at or above ``threshold * max|C|``.

    Positions and heights are refined by a 3-point parabola. When the
    series knows its window line shape, a candidate is dropped unless it
    stands ``leakage_margin`` times above the summed leakage of the
    stronger peaks already accepted (side lobes fail that test). Sorted by
    descending height.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    mag = sp.magnitude
    if mag.size == 0:
        return []
    top = mag.max()
    if top == 0:
        return []
    cut = threshold * top
    interior = np.flatnonzero((mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])) + 1
    candidates = [k for k in interior if mag[k] >= cut]
    if threshold >= 1.0 or not candidates:
        k = int(np.argmax(mag))
        candidates = [k] if mag[k] >= cut else []
    de = sp.energies[1] - sp.energies[0]
    peaks = []
    for k in candidates:
        if 0 < k < mag.size - 1:
            y0, y1, y2 = mag[k - 1], mag[k], mag[k + 1]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            peaks.append(Peak(float(sp.energies[k] + shift * de), float(y1 - 0.25 * (y0 - y2) * shift)))
        else:
            peaks.append(Peak(float(sp.energies[k]), float(mag[k])))
    peaks.sort(key=lambda p: -p.height)
    if sp.leakage is None or len(peaks) < 2:
        return peaks
    kept: List[Peak] = []
    for p in peaks:
        if kept:
            offsets = p.energy - np.array([k.energy for k in kept])
            heights = np.array([k.height for k in kept])
            if p.height <= leakage_margin * float(heights @ sp.leakage(offsets)):
                continue
        kept.append(p)
    return kept


def write_spectrum_csv(path: Union[str, Path], sp: SpectrumSeries) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["E", "re_C", "im_C", "abs_C"])
        for e, c in zip(sp.energies, sp.values):
            writer.writerow([repr(float(e)), repr(float(c.real)), repr(float(c.imag)), repr(float(abs(c)))])
    return path


def read_spectrum_csv(path: Union[str, Path]) -> SpectrumSeries:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    energies = np.array([float(r["E"]) for r in rows])
    values = np.array([complex(float(r["re_C"]), float(r["im_C"])) for r in rows])
    return SpectrumSeries(energies, values)


def write_peaks_csv(path: Union[str, Path], labelled_peaks) -> Path:
    """``labelled_peaks`` is an iterable of (series_name, Peak)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["series", "E", "height"])
        for name, p in labelled_peaks:
            writer.writerow([name, repr(p.energy), repr(p.height)])
    return path


def read_peaks_csv(path: Union[str, Path]):
    with Path(path).open(newline="") as fh:
        return [(r["series"], Peak(float(r["E"]), float(r["height"]))) for r in csv.DictReader(fh)]
