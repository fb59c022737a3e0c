"""Apodization windows and their line shapes.

A window is sampled on the same nodes t_i = i*T/N_t as the propagated
trajectory, and its line shape

    L(dE) = (1/N_t) * sum_i u_i w(t_i) exp(i dE t_i)

is the quadrature counterpart of (1/T) * integral_0^T w(t) exp(i dE t) dt.
Side-lobe levels, suppression factors and lobe widths are measured
numerically from sampled line shapes so that tabulated windows need no
closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import InvalidBandError
from .quadrature import QuadratureRule

KINDS = ("rectangular", "hann", "custom-table")


@dataclass(frozen=True, eq=False)
class Window:
    kind: str
    values: np.ndarray
    total_time: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("window needs at least two nodes")
        if np.any(vals < -1e-15) or np.any(vals > 1 + 1e-15):
            raise ValueError("window values must lie in [0, 1]")
        if abs(vals.max() - 1.0) > 1e-12:
            raise ValueError(f"window maximum must be 1, got {vals.max()}")
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        object.__setattr__(self, "values", np.clip(vals, 0.0, 1.0))

    @property
    def steps(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    @classmethod
    def rectangular(cls, steps: int, total_time: float) -> "Window":
        return cls("rectangular", np.ones(steps + 1), total_time)

    @classmethod
    def hann(cls, steps: int, total_time: float) -> "Window":
        if steps < 2:
            raise ValueError("a Hann window needs at least two steps (N_t = 1 samples only zeros)")
        t = np.arange(steps + 1) / steps
        vals = 0.5 * (1.0 - np.cos(2.0 * np.pi * t))
        # odd N_t has no node at T/2; rescale so the sampled peak is 1
        return cls("hann", vals / vals.max(), total_time)

    @classmethod
    def from_table(cls, fractions, values, steps: int, total_time: float) -> "Window":
        """Interpolate ``w`` tabulated at ``t/T`` fractions onto the nodes.

        Linear interpolation can miss the tabulated peak, so the sampled
        window is rescaled to a unit maximum.
        """
        fractions = np.asarray(fractions, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(fractions < 0) or np.any(fractions > 1):
            raise ValueError("window table times must be fractions in [0, 1]")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("window table values must lie in [0, 1]")
        order = np.argsort(fractions)
        sampled = np.interp(np.arange(steps + 1) / steps, fractions[order], values[order])
        if sampled.max() <= 0:
            raise ValueError("window table is identically zero")
        return cls("custom-table", sampled / sampled.max(), total_time)

    @classmethod
    def named(cls, kind: str, steps: int, total_time: float) -> "Window":
        if kind == "rectangular":
            return cls.rectangular(steps, total_time)
        if kind == "hann":
            return cls.hann(steps, total_time)
        raise ValueError(f"unknown window kind {kind!r}")


def load_window_table(path: Union[str, Path], steps: int, total_time: float) -> Window:
    table = np.loadtxt(path, comments="#", delimiter=None, ndmin=2)
    if table.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (t_fraction, w)")
    return Window.from_table(table[:, 0], table[:, 1], steps, total_time)


def window_value(w: Window, i: int) -> float:
    if not 0 <= i <= w.steps:
        raise IndexError(f"node index {i} outside [0, {w.steps}]")
    return float(w.values[i])


def _weights(w: Window, quadrature: Optional[QuadratureRule]) -> np.ndarray:
    q = quadrature or QuadratureRule.trapezoidal(w.steps)
    if q.steps != w.steps:
        raise ValueError(f"quadrature has {q.steps} steps, window has {w.steps}")
    return q.weights


def line_shape(w: Window, delta_e, quadrature: Optional[QuadratureRule] = None):
    """Line shape by direct quadrature; ``delta_e`` may be a scalar or array."""
    coeffs = _weights(w, quadrature) * w.values / w.steps
    de = np.asarray(delta_e, dtype=float)
    phases = np.exp(1j * np.multiply.outer(de, w.times))
    out = phases @ coeffs
    return complex(out) if out.ndim == 0 else out


def line_shape_fft(w: Window, padding: int = 32, quadrature: Optional[QuadratureRule] = None):
    """Line shape on the non-negative offsets 2*pi*k/(M*dt), k <= M/2.

    Zero-padded inverse DFT of the weighted samples, M = padding * N_t.
    """
    coeffs = _weights(w, quadrature) * w.values / w.steps
    m = max(padding * w.steps, coeffs.size)
    spectrum = m * np.fft.ifft(coeffs, n=m)
    half = m // 2 + 1
    offsets = 2.0 * np.pi * np.arange(half) / (m * w.dt)
    return offsets, spectrum[:half]


def main_lobe_width(w: Window, quadrature: Optional[QuadratureRule] = None, padding: int = 32) -> float:
    """Offset of the first local minimum of |L|, in units of pi/T."""
    return first_minimum(w, quadrature, padding) * w.total_time / np.pi


def first_minimum(w: Window, quadrature: Optional[QuadratureRule] = None, padding: int = 32) -> float:
    offsets, ls = line_shape_fft(w, padding, quadrature)
    mag = np.abs(ls)
    falling = np.flatnonzero((mag[1:-1] <= mag[:-2]) & (mag[1:-1] <= mag[2:]))
    if falling.size == 0:
        return float(offsets[-1])
    k = falling[0] + 1
    return float(_parabolic_vertex(offsets, mag, k)[0])


def _parabolic_vertex(x: np.ndarray, y: np.ndarray, k: int):
    if k <= 0 or k >= len(y) - 1:
        return x[k], y[k]
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return x[k], y[k]
    shift = 0.5 * (y0 - y2) / denom
    h = x[k + 1] - x[k]
    return x[k] + shift * h, y1 - 0.25 * (y0 - y2) * shift


def suppression_factor(
    w: Window,
    exclusion: float,
    quadrature: Optional[QuadratureRule] = None,
    padding: int = 32,
) -> float:
    """max |L(dE)| over exclusion <= |dE| <= pi/dt.

    The coarse maximum from the padded DFT is polished by direct quadrature
    on a local grid.
    """
    lobe = first_minimum(w, quadrature, padding)
    if exclusion < lobe * (1.0 - 1e-6):
        raise InvalidBandError(
            f"exclusion {exclusion:g} lies inside the main lobe (half-width {lobe:g})"
        )
    nyquist = np.pi / w.dt
    if exclusion >= nyquist:
        return float(abs(line_shape(w, exclusion, quadrature)))
    offsets, ls = line_shape_fft(w, padding, quadrature)
    mag = np.abs(ls)
    keep = offsets >= exclusion
    best = float(abs(line_shape(w, exclusion, quadrature)))
    if not keep.any():
        return best
    k = int(np.flatnonzero(keep)[np.argmax(mag[keep])])
    h = offsets[1] - offsets[0]
    lo = max(exclusion, offsets[k] - h)
    hi = min(nyquist, offsets[k] + h)
    fine = np.linspace(lo, hi, 65)
    best = max(best, float(np.abs(line_shape(w, fine, quadrature)).max()))
    return best


def to_db(value: float, reference: float = 1.0) -> float:
    return float(20.0 * np.log10(value / reference))


@dataclass(frozen=True)
class LineShapeReport:
    coherent_gain: float
    offsets: np.ndarray
    magnitudes: np.ndarray
    exclusion: float
    suppression: float
    lobe_width: float

    @property
    def suppression_db(self) -> float:
        """Suppression relative to the coherent gain."""
        return to_db(self.suppression, self.coherent_gain)


def line_shape_report(
    w: Window,
    exclusion: Optional[float] = None,
    quadrature: Optional[QuadratureRule] = None,
    padding: int = 32,
) -> LineShapeReport:
    """Summarize a window; ``exclusion`` defaults to the first null."""
    offsets, ls = line_shape_fft(w, padding, quadrature)
    lobe = first_minimum(w, quadrature, padding)
    band = lobe if exclusion is None else exclusion
    return LineShapeReport(
        coherent_gain=float(abs(line_shape(w, 0.0, quadrature))),
        offsets=offsets,
        magnitudes=np.abs(ls),
        exclusion=band,
        suppression=suppression_factor(w, band, quadrature, padding),
        lobe_width=lobe * w.total_time / np.pi,
    )
