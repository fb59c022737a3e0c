"""Quadrature weights u_i for sums over the N_t + 1 trajectory nodes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Weights normalized so that ``sum(u) == N_t`` (a constant integrand
    averages to itself once divided by N_t)."""

    name: str
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("quadrature needs at least two nodes")
        if np.any(w < 0):
            raise ValueError("quadrature weights must be non-negative")
        steps = w.size - 1
        if abs(w.sum() - steps) > 1e-9 * steps:
            raise ValueError(f"quadrature weights sum to {w.sum()}, expected {steps}")
        object.__setattr__(self, "weights", w)

    @property
    def steps(self) -> int:
        return self.weights.size - 1

    @classmethod
    def trapezoidal(cls, steps: int) -> "QuadratureRule":
        if steps < 1:
            raise ValueError("steps must be >= 1")
        w = np.ones(steps + 1)
        w[0] = w[-1] = 0.5
        return cls("trapezoidal", w)

    @classmethod
    def custom(cls, weights) -> "QuadratureRule":
        return cls("custom", weights)
