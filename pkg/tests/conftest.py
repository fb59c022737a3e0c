import numpy as np
import pytest

from specfilter.filtering import FilterPlan, TrialSpec
from specfilter.numerics import GridSpec, PotentialSpec, diagonalize_hamiltonian

# Reference oscillator setup: L=40, N=1024, cos^2 trial of width 10, T=100.
LENGTH, POINTS, WIDTH, TOTAL_TIME, STEPS = 40.0, 1024, 10.0, 100.0, 8192


@pytest.fixture(scope="session")
def grid():
    return GridSpec(LENGTH, POINTS)


@pytest.fixture(scope="session")
def oscillator(grid):
    return PotentialSpec.harmonic(grid)


@pytest.fixture(scope="session")
def eig(grid, oscillator):
    return diagonalize_hamiltonian(grid, oscillator, 32)


def oscillator_plan(window="hann", steps=STEPS, e_target=0.5, grid=None):
    grid = grid or GridSpec(LENGTH, POINTS)
    return FilterPlan.create(
        grid,
        PotentialSpec.harmonic(grid),
        TrialSpec("cos2", WIDTH),
        window,
        e_target,
        TOTAL_TIME,
        steps,
    )


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(20.0, 64)


@pytest.fixture(scope="session")
def small_eig(small_grid):
    return diagonalize_hamiltonian(small_grid, PotentialSpec.harmonic(small_grid), 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(grid, rng):
    from specfilter.numerics import StateVector

    amps = rng.normal(size=grid.points) + 1j * rng.normal(size=grid.points)
    return StateVector(amps, grid).normalized()


# acceptance lines collected by test_acceptance.py and printed at the end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
