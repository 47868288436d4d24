"""Closed-form transforms, decay fits and the epsilon-bound check."""

import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rapidpoints.errors import GridMismatchError, InvalidArgumentError
from rapidpoints.fourier import (
    SERIES_SWITCH,
    SpectrumGrid,
    decay_exponent,
    fit_to_dict,
    fourier_dimension_estimate,
    lemma22_check,
    log_frequency_grid,
    spectrum_to_csv,
    transform_measure,
    transform_uniform,
)
from rapidpoints.measure import StageMeasure


def measure(N=4, stage=1, sel=(1,), p=0.25):
    return StageMeasure(stage=stage, base=N, selected=np.asarray(sel, np.int64), p=p)


def uniform_spectrum(u):
    return np.array([transform_uniform(x) for x in u])


class TestTransformUniform:
    def test_at_zero(self):
        assert transform_uniform(0.0) == 1.0

    def test_at_two_pi(self):
        assert abs(transform_uniform(2 * np.pi)) < 1e-12

    def test_envelope_two_over_u(self):
        u = np.linspace(1.0, 5000.0, 2_000)
        vals = uniform_spectrum(u)
        assert np.all(np.abs(vals) <= 2.0 / u + 1e-15)

    def test_series_and_closed_form_agree_at_switch(self):
        a = transform_uniform(SERIES_SWITCH * (1 - 1e-9))
        b = transform_uniform(SERIES_SWITCH * (1 + 1e-9))
        assert abs(a - b) <= 1e-11

    def test_conjugate_symmetry(self):
        for u in (0.5, 3.7, 100.0):
            assert transform_uniform(-u) == pytest.approx(np.conj(transform_uniform(u)), rel=1e-12)


class TestTransformMeasure:
    def test_single_interval_sinc_modulus(self):
        # one interval [0, h] with mass 1: |mu-hat(u)| = |sin(uh/2)/(uh/2)|
        h = 0.25
        m = measure(N=4, sel=[1], p=0.25)
        u = np.linspace(0.1, 60.0, 500)
        spec = transform_measure(m, u)
        expect = np.abs(np.sinc(u * h / 2 / np.pi))
        assert np.allclose(np.abs(spec.values), expect, atol=1e-12)

    def test_first_zero_at_two_pi_over_h(self):
        h = 0.25
        m = measure(N=4, sel=[1], p=0.25)
        spec = transform_measure(m, np.array([2 * np.pi / h]))
        assert abs(spec.values[0]) < 1e-12

    def test_full_selection_matches_uniform(self):
        m = measure(N=8, sel=range(1, 9), p=1.0)
        u = np.logspace(-2, 3, 200)
        spec = transform_measure(m, u)
        expect = uniform_spectrum(u)
        assert np.allclose(spec.values, expect, rtol=1e-12, atol=1e-15)

    def test_low_frequency_limit_is_mass(self):
        m = measure(N=4, sel=[1, 3], p=0.5)
        mass = 2 * 2.0 * 0.25
        spec = transform_measure(m, np.array([1e-8]))
        assert abs(spec.values[0] - mass) < 1e-6

    def test_additivity_over_intervals(self):
        u = np.logspace(0, 2, 50)
        both = transform_measure(measure(N=4, sel=[1, 3], p=0.5), u).values
        first = transform_measure(measure(N=4, sel=[1], p=0.5), u).values
        third = transform_measure(measure(N=4, sel=[3], p=0.5), u).values
        assert np.allclose(both, first + third, rtol=1e-12)

    def test_mass_bound_everywhere(self):
        m = measure(N=16, sel=[2, 7, 9, 16], p=0.3)
        from rapidpoints.measure import total_mass

        u = np.logspace(-3, 4, 1000)
        spec = transform_measure(m, u)
        assert np.max(np.abs(spec.values)) <= total_mass(m) * (1 + 1e-12)

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidArgumentError):
            transform_measure(measure(), np.array([]))


class TestLogFrequencyGrid:
    def test_spacing_and_bounds(self):
        u = log_frequency_grid(1000.0, 10)
        assert np.all(u > 1.0)
        assert u[-1] >= 1000.0 * 0.999
        ratios = u[1:] / u[:-1]
        assert np.allclose(ratios, 10 ** (1 / 10), rtol=1e-12)


class TestDecayExponent:
    def test_exact_power_law(self):
        u = np.logspace(1, 4, 200)
        spec = SpectrumGrid(u_values=u, values=(u**-0.4).astype(complex))
        fit = decay_exponent(spec, 10.0)
        assert fit.exponent == pytest.approx(0.4, rel=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-9)

    def test_lebesgue_spectrum_exponent_near_one(self):
        u = np.logspace(1, 4, 400)
        spec = SpectrumGrid(u_values=u, values=uniform_spectrum(u))
        fit = decay_exponent(spec, 10.0)
        assert fit.exponent == pytest.approx(1.0, abs=0.05)

    def test_constant_spectrum_exponent_zero(self):
        u = np.logspace(1, 3, 100)
        spec = SpectrumGrid(u_values=u, values=np.full(100, 0.7, dtype=complex))
        assert decay_exponent(spec, 10.0).exponent == pytest.approx(0.0, abs=1e-12)

    def test_too_few_points_rejected(self):
        u = np.logspace(1, 2, 5)
        spec = SpectrumGrid(u_values=u, values=(u**-0.5).astype(complex))
        with pytest.raises(InvalidArgumentError):
            decay_exponent(spec, 10.0)

    def test_all_zero_spectrum_rejected(self):
        u = np.logspace(1, 3, 50)
        spec = SpectrumGrid(u_values=u, values=np.zeros(50, dtype=complex))
        with pytest.raises(InvalidArgumentError):
            decay_exponent(spec, 10.0)

    @given(st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=25, deadline=None)
    def test_scale_invariance(self, c):
        u = np.logspace(1, 4, 100)
        base = SpectrumGrid(u_values=u, values=(u**-0.3).astype(complex))
        scaled = SpectrumGrid(u_values=u, values=c * (u**-0.3).astype(complex))
        a = decay_exponent(base, 10.0)
        b = decay_exponent(scaled, 10.0)
        assert b.exponent == pytest.approx(a.exponent, rel=1e-9, abs=1e-12)


class TestFourierDimension:
    def test_doubles_exponent(self):
        fit = decay_exponent(
            SpectrumGrid(u_values=np.logspace(1, 4, 50), values=(np.logspace(1, 4, 50) ** -0.375).astype(complex)),
            10.0,
        )
        assert fourier_dimension_estimate(fit) == pytest.approx(0.75, rel=1e-6)

    def test_clamps(self):
        from rapidpoints.fourier import DecayFit

        u = np.logspace(1, 4, 50)
        high = decay_exponent(SpectrumGrid(u_values=u, values=(u**-0.9).astype(complex)), 10.0)
        assert fourier_dimension_estimate(high) == 1.0
        low = DecayFit(exponent=-0.2, intercept=0.0, u_min=10.0, r_squared=1.0, n_points=50)
        assert fourier_dimension_estimate(low) == 0.0


class TestLemma22Check:
    def grid(self):
        return log_frequency_grid(100.0, 16)

    def test_identical_spectra_no_violations(self):
        u = self.grid()
        s = SpectrumGrid(u_values=u, values=uniform_spectrum(u))
        report = lemma22_check(s, s, 0.5, 0.5)
        assert len(report.violating_u) == 0
        assert report.max_ratio == 0.0

    def test_epsilon_linearity(self):
        u = self.grid()
        a = SpectrumGrid(u_values=u, values=uniform_spectrum(u))
        b = SpectrumGrid(u_values=u, values=uniform_spectrum(u) + 0.01)
        r1 = lemma22_check(a, b, 0.5, 0.5)
        r2 = lemma22_check(a, b, 1.0, 0.5)
        assert r2.max_ratio == pytest.approx(r1.max_ratio / 2, rel=1e-12)

    def test_grid_mismatch_rejected(self):
        u = self.grid()
        a = SpectrumGrid(u_values=u, values=uniform_spectrum(u))
        v = u * 1.5
        b = SpectrumGrid(u_values=v, values=uniform_spectrum(v))
        with pytest.raises(GridMismatchError):
            lemma22_check(a, b, 0.5, 0.5)

    def test_violation_detected(self):
        u = self.grid()
        a = SpectrumGrid(u_values=u, values=uniform_spectrum(u))
        b = SpectrumGrid(u_values=u, values=uniform_spectrum(u) + 1.0)
        report = lemma22_check(a, b, 0.5, 0.5)
        assert len(report.violating_u) == len(u)
        assert report.max_ratio > 1.0


class TestOutputs:
    def test_spectrum_csv(self):
        u = np.array([1.0, 2.0])
        spec = SpectrumGrid(u_values=u, values=np.array([1 + 0j, 0.5 - 0.5j]))
        buf = io.StringIO()
        spectrum_to_csv(spec, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "u,re,im,abs"
        assert lines[1].startswith("1.0,1.0,0.0,")

    def test_fit_dict_roundtrips_through_json(self):
        u = np.logspace(1, 4, 50)
        fit = decay_exponent(SpectrumGrid(u_values=u, values=(u**-0.5).astype(complex)), 10.0)
        d = json.loads(json.dumps(fit_to_dict(fit)))
        assert set(d) == {"exponent", "intercept", "u_min", "r_squared", "n_points"}
        assert d["exponent"] == pytest.approx(0.5, rel=1e-9)
