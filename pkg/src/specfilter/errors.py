"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SpecFilterError(Exception):
    exit_code = 1


class ConfigError(SpecFilterError, ValueError):
    """Malformed or incomplete run configuration."""

    exit_code = 2


class GridMismatchError(SpecFilterError, ValueError):
    """Two states (or a state and an operator) live on different grids."""

    exit_code = 2


class InvalidBandError(SpecFilterError, ValueError):
    """Suppression requested for an exclusion band inside the main lobe."""

    exit_code = 2


class NumericalError(SpecFilterError, ArithmeticError):
    exit_code = 3


class InvariantError(SpecFilterError, AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""

    exit_code = 4


class DegenerateSpectrumError(SpecFilterError, ValueError):
    exit_code = 5


class UndefinedOverlapError(SpecFilterError, ValueError):
    exit_code = 2


class RestartBudgetExceeded(SpecFilterError, RuntimeError):
    """Sampled circuit run gave up; ``stats`` holds what was observed so far."""

    exit_code = 3

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
