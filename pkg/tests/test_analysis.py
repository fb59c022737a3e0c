import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specfilter.analysis import (
    AnalysisInputs,
    accuracy_steps,
    alt_comparison,
    eigenstate_probability,
    evolution_error,
    filtering_error_bound,
    fit_evolution_constant,
    fit_power_law,
    measured_cost_ratio,
    minimum_time_steps,
    populated_gap,
    resolution_steps,
)
from specfilter.errors import DegenerateSpectrumError, UndefinedOverlapError
from specfilter.evolution import Propagator
from specfilter.numerics import PotentialSpec
from specfilter.windows import Window, line_shape_report

unit = st.floats(1e-6, 1.0)


class TestFilteringErrorBound:
    def test_full_overlap(self):
        assert filtering_error_bound(0.3, 1.0, 0.5) == 0.0

    def test_no_leakage(self):
        assert filtering_error_bound(0.0, 0.3, 0.5) == 0.0

    def test_zero_overlap(self):
        with pytest.raises(UndefinedOverlapError):
            filtering_error_bound(0.1, 0.0, 0.5)

    def test_formula(self):
        assert filtering_error_bound(0.1, 0.4, 0.5) == pytest.approx(0.01 * 0.6 / (0.4 * 0.25))

    @settings(max_examples=100, deadline=None)
    @given(s=unit, a1=unit, a2=unit, g=unit)
    def test_monotone(self, s, a1, a2, g):
        lo, hi = sorted((a1, a2))
        assert filtering_error_bound(s, lo, g) >= filtering_error_bound(s, hi, g)
        assert filtering_error_bound(s * 0.5, lo, g) <= filtering_error_bound(s, lo, g)


class TestEigenstateProbability:
    def test_endpoints(self):
        assert eigenstate_probability(0.0, 0.5) == 0.0
        assert eigenstate_probability(1.0, 1.0) == 0.5

    def test_reference_inputs(self):
        p = eigenstate_probability(0.45, 0.5)
        assert p == pytest.approx(0.1011, abs=1e-4)
        # composed with the deterministic P_success of the reference run (0.6748)
        assert abs(p * 0.6748 - 0.061) / 0.061 < 0.15

    @settings(max_examples=100, deadline=None)
    @given(x1=unit, x2=unit)
    def test_increasing_and_bounded(self, x1, x2):
        lo, hi = sorted((x1, x2))
        assert eigenstate_probability(lo, 1.0) <= eigenstate_probability(hi, 1.0) <= 0.5

    def test_overlap_range(self):
        with pytest.raises(ValueError):
            eigenstate_probability(1.5, 0.5)


class TestMinimumTimeSteps:
    def test_resolution_term(self):
        dt = 100 / 8192
        b = 2 * math.pi / dt
        assert resolution_steps(1.0, b, 2.0) == pytest.approx(b / 4)
        n = minimum_time_steps(1.0, b, 2.0, 1e-30, 1.0)
        assert n == math.floor(b / 4) + 1

    def test_infinite_accuracy_target(self):
        assert minimum_time_steps(2.0, 100.0, 1.0, 5.0, math.inf) == 101

    def test_doubling_width(self):
        assert resolution_steps(4.0, 300.0, 2.0) == 2 * resolution_steps(2.0, 300.0, 2.0)

    def test_accuracy_term(self):
        assert accuracy_steps(1e4, 1e-8, 2.0) == pytest.approx(1e6)
        assert minimum_time_steps(1.0, 10.0, 2.0, 1e4, 1e-8, 2.0) == 1_000_001

    def test_degenerate(self):
        with pytest.raises(DegenerateSpectrumError):
            minimum_time_steps(1.0, 10.0, 0.0, 1.0, 1.0)

    def test_nonpositive_inputs(self):
        with pytest.raises(ValueError):
            minimum_time_steps(0.0, 10.0, 1.0, 1.0, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(w=st.floats(0.5, 6), b=st.floats(10, 1e4), gap=st.floats(0.1, 10),
           c=st.floats(1e-3, 1e6), eps=st.floats(1e-10, 1e-2), shrink=st.floats(0.01, 0.99))
    def test_inactive_term_irrelevant(self, w, b, gap, c, eps, shrink):
        n = minimum_time_steps(w, b, gap, c, eps)
        res, acc = resolution_steps(w, b, gap), accuracy_steps(c, eps, 2.0)
        assert n > max(res, acc) >= n - 1
        if res > acc:
            # shrinking C lowers the already-inactive accuracy term
            assert minimum_time_steps(w, b, gap, c * shrink, eps) == n
        else:
            assert minimum_time_steps(w * shrink, b, gap, c, eps) == n


class TestComparison:
    def inputs(self, **kw):
        base = dict(suppression=0.2, overlap=0.45, gain=1.0, lobe_width=2.0, bandwidth=500.0,
                    gap=2.0, evolution_constant=1.0)
        base.update(kw)
        return AnalysisInputs(**base)

    def test_endpoints(self):
        r = alt_comparison(self.inputs(), 1000, 1000, 0.2)
        assert r.cost_ratio_bound == pytest.approx(2 * math.e)
        assert r.accuracy_ratio == pytest.approx(1.0)

    def test_window_accuracy_ratio(self):
        hann = line_shape_report(Window.hann(8192, 100.0))
        rect = line_shape_report(Window.rectangular(8192, 100.0))
        r = alt_comparison(self.inputs(suppression=hann.suppression, gain=hann.coherent_gain),
                           1600, 8192, rect.suppression)
        # relative side-lobe levels make the gain cancel
        assert r.accuracy_ratio == pytest.approx(10 ** ((hann.suppression_db - rect.suppression_db) / 10), rel=1e-12)
        assert r.accuracy_ratio == pytest.approx(10 ** ((-31.5 + 13.3) / 10), rel=0.02)

    def test_measured_cost_ratio_arithmetic(self):
        assert measured_cost_ratio(1600, 0.061, 8192, 0.45) == pytest.approx(1.44, abs=0.01)

    def test_inputs_validated(self):
        with pytest.raises(ValueError):
            self.inputs(overlap=0.0)
        with pytest.raises(ValueError):
            self.inputs(gap=-1.0)


class TestFits:
    def test_power_law_exact(self):
        n = np.array([10, 20, 40, 80])
        c, q = fit_power_law(n, 3.0 * n**-2.0)
        assert c == pytest.approx(3.0) and q == pytest.approx(2.0)

    def test_evolution_error_zero_for_exact_eigvec(self, small_grid):
        prop = Propagator(small_grid, PotentialSpec.harmonic(small_grid), 0.05)
        n = small_grid.points
        u = np.array([prop.advance(col) for col in np.eye(n, dtype=complex)]).T
        _, vecs = np.linalg.eig(u)
        from specfilter.numerics import StateVector

        chi = StateVector(vecs[:, 0], small_grid).normalized()
        assert evolution_error(prop, chi, 5.0) < 1e-20

    def test_evolution_constant_fit(self, small_grid, small_eig):
        c, q, errors = fit_evolution_constant(
            small_grid, PotentialSpec.harmonic(small_grid), small_eig.states[0], 10.0, [100, 200, 400]
        )
        # squared metric: twice the scheme order
        assert q == pytest.approx(4.0, abs=0.1)
        assert errors[0] > errors[1] > errors[2] > 0


class TestPopulatedGap:
    def test_parity_excluded(self):
        e = np.arange(10) + 0.5
        a = np.where(np.arange(10) % 2 == 0, 0.3, 0.0)
        assert populated_gap(e, a, 0) == 2.0
        assert populated_gap(e, np.full(10, 0.3), 0) == 1.0

    def test_oscillator_trial(self, grid, eig):
        from specfilter.filtering import TrialSpec, mode_amplitudes

        a = mode_amplitudes(TrialSpec("cos2", 10.0).build(grid), eig)
        assert populated_gap(eig.energies, a, 0) == pytest.approx(2.0, abs=1e-6)

    def test_degenerate(self):
        with pytest.raises(DegenerateSpectrumError):
            populated_gap(np.array([0.5, 0.5]), np.array([1.0, 1.0]), 0)
        with pytest.raises(DegenerateSpectrumError):
            populated_gap(np.array([0.5, 1.5]), np.array([1.0, 0.0]), 0)
