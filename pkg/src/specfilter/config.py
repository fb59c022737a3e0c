"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Relative paths (custom potential,
trial, window or quadrature tables) resolve against the config file's
directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .errors import ConfigError
from .filtering import FilterPlan, TrialSpec
from .numerics import GridSpec, PotentialSpec
from .quadrature import QuadratureRule
from .windows import Window, load_window_table

REQUIRED = ("length", "points", "potential", "trial", "window", "e_target", "total_time", "steps")

# key -> (parser, default); None default means "required or computed"
SCHEMA = {
    "length": (float, None),
    "points": (int, None),
    "potential": (str, None),
    "trial": (str, None),
    "trial_width": (float, None),
    "window": (str, None),
    "spectrum_window": (str, None),
    "quadrature": (str, "trapezoidal"),
    "e_target": (float, None),
    "total_time": (float, None),
    "steps": (int, None),
    "mode": (str, "deterministic"),
    "autocorrelation": (str, "direct"),
    "eigen_count": (int, 32),
    "peak_threshold": (float, 1e-3),
    "padding": (int, 4),
    "accuracy": (float, 1e-8),
    "evolution_constant": (float, None),
    "evolution_order": (float, None),
    "max_restarts": (int, 1000),
    "trials": (int, 2000),
    "seed": (int, 0),
    "jobs": (int, 1),
    "out": (str, "."),
}


@dataclass
class RunConfig:
    values: Dict[str, object]
    lines: Dict[str, int] = field(default_factory=dict)
    source: Optional[Path] = None

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        default = SCHEMA[key][1]
        if default is None and key in REQUIRED:
            raise ConfigError(f"missing required key '{key}'")
        return default

    def get(self, key, default=None):
        value = self[key]
        return default if value is None else value

    def with_overrides(self, **overrides) -> "RunConfig":
        values = dict(self.values)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(values, dict(self.lines), self.source)

    def _path(self, value: str) -> Path:
        p = Path(value)
        if not p.is_absolute() and self.source is not None:
            p = self.source.parent / p
        return p

    def _fail(self, key: str, message: str):
        where = f"line {self.lines[key]}: " if key in self.lines else ""
        src = f"{self.source}: " if self.source else ""
        raise ConfigError(f"{src}{where}{key}: {message}")

    def grid(self) -> GridSpec:
        try:
            return GridSpec(self["length"], self["points"])
        except ValueError as exc:
            self._fail("points", str(exc))

    def potential(self, grid: GridSpec) -> PotentialSpec:
        kind = self["potential"]
        if kind == "harmonic":
            return PotentialSpec.harmonic(grid)
        if kind == "free":
            return PotentialSpec.free(grid)
        table = self._table("potential", kind, 2)
        return PotentialSpec.from_table(grid, table[:, 0], table[:, 1])

    def trial(self) -> TrialSpec:
        kind = self["trial"]
        if kind == "cos2":
            width = self.values.get("trial_width")
            if width is None:
                raise ConfigError("missing required key 'trial_width' (needed by trial = cos2)")
            return TrialSpec("cos2", width)
        return TrialSpec("custom-table", 0.0, self._table("trial", kind, 2))

    def window(self, key: str = "window") -> Window:
        name = self[key] if key == "window" else (self.values.get(key) or self["window"])
        steps, total = self["steps"], self["total_time"]
        if name in ("rectangular", "hann"):
            return Window.named(name, steps, total)
        path = self._path(name)
        if not path.exists():
            self._fail(key, f"unknown window {name!r} (expected rectangular, hann or a table path)")
        try:
            return load_window_table(path, steps, total)
        except ValueError as exc:
            self._fail(key, str(exc))

    def quadrature(self) -> QuadratureRule:
        name = self["quadrature"]
        if name == "trapezoidal":
            return QuadratureRule.trapezoidal(self["steps"])
        table = self._table("quadrature", name, 1)
        try:
            return QuadratureRule.custom(table[:, 0])
        except ValueError as exc:
            self._fail("quadrature", str(exc))

    def _table(self, key: str, value: str, min_cols: int) -> np.ndarray:
        path = self._path(value)
        if not path.exists():
            self._fail(key, f"no such table {str(path)!r}")
        try:
            table = np.loadtxt(path, comments="#", ndmin=2)
        except ValueError as exc:
            self._fail(key, f"unreadable table: {exc}")
        if table.shape[1] < min_cols:
            self._fail(key, f"table needs at least {min_cols} columns")
        return table

    def plan(self) -> FilterPlan:
        grid = self.grid()
        try:
            return FilterPlan(
                grid=grid,
                potential=self.potential(grid),
                trial=self.trial(),
                window=self.window(),
                quadrature=self.quadrature(),
                e_target=self["e_target"],
                total_time=self["total_time"],
                steps=self["steps"],
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"invalid plan: {exc}") from exc


def parse_config(text: str, source: Optional[Path] = None) -> RunConfig:
    values: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    prefix = f"{source}: " if source else ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{prefix}line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{prefix}line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{prefix}line {lineno}: duplicate key '{key}'")
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(value)
        except ValueError:
            raise ConfigError(
                f"{prefix}line {lineno}: cannot parse {value!r} as {parser.__name__} for '{key}'"
            ) from None
        lines[key] = lineno
    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"{prefix}missing required key '{key}'")
    return RunConfig(values, lines, source)


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path)
