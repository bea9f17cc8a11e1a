import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from eitprop.errors import (
    DomainError,
    InvalidInterval,
    NotYetArrived,
    SingularLogDerivative,
    WeakProbeWarning,
)
from eitprop.physics import (
    CouplingProfile,
    CumulativeIntegral,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
    alpha_integral,
    check_weak_probe,
    gamma1_of_t,
    opacity_integral,
    xi_nonlinear_time,
)


def f_reference(t):
    """Switching function written out independently of the package."""
    if t < 1000 or t > 2500:
        return 1.0
    return np.exp(-(t / 100 - 10) ** 2) + np.exp(-(t / 100 - 20) ** 2)


STORAGE_GRID = TimeGrid(0.0, 4500.0, 9001)


class TestMedium:
    def test_validation(self):
        with pytest.raises(DomainError):
            MediumParams(gamma_upper=0.0)
        with pytest.raises(DomainError):
            MediumParams(gamma_coherence=-0.1)
        with pytest.raises(DomainError):
            MediumParams(q_p=0.0)

    def test_depth_normalization(self):
        m = MediumParams(gamma_upper=2.0, gamma_coherence=0.5, q_p=3.0)
        assert m.optical_depth(4.0, Model.STANDARD) == pytest.approx(6.0)
        assert m.optical_depth(4.0, Model.DEPHASED) == pytest.approx(12.0 / 2.5)
        assert m.length(m.optical_depth(4.0, "dephased"), "dephased") == pytest.approx(4.0)


class TestCoupling:
    def test_piecewise_matches_switching_function(self):
        c = CouplingProfile("piecewise", amplitude=1.0)
        t = np.array([0.0, 999.9, 1000.0, 1234.5, 1500.0, 2000.0, 2500.0, 2500.1, 4000.0])
        np.testing.assert_allclose(c.omega(t), [f_reference(x) for x in t], rtol=1e-15,
                                   atol=1e-300)

    def test_scaled_piecewise(self):
        c = CouplingProfile("piecewise", amplitude=1 / np.sqrt(10))
        assert c.omega(1800.0) == pytest.approx(f_reference(1800.0) / np.sqrt(10), rel=1e-14)

    def test_log_derivative_piecewise_matches_finite_difference(self):
        c = CouplingProfile("piecewise")
        t = np.array([1100.0, 1400.0, 1500.0, 1700.0, 2100.0])
        h = 1e-4
        fd = (np.log(c.omega(t + h)) - np.log(c.omega(t - h))) / (2 * h)
        np.testing.assert_allclose(c.log_derivative(t), fd, rtol=1e-6)

    def test_switch_off(self):
        c = CouplingProfile("switch_off", amplitude=2.0, rate=0.5, t_off=10.0)
        assert c.omega(5.0) == 2.0
        assert c.omega(14.0) == pytest.approx(2.0 * np.exp(-2.0))
        assert c.log_derivative(14.0) == pytest.approx(-0.5)
        assert c.log_derivative(5.0) == 0.0

    def test_zero_coupling_rejected(self):
        with pytest.raises(DomainError):
            CouplingProfile("constant", amplitude=0.0)
        with pytest.raises(DomainError):
            CouplingProfile("tabulated", samples_t=(0, 1, 2, 3), samples_value=(0, 0, 0, 0))

    def test_tabulated_clamps_log_derivative(self):
        t = np.linspace(0, 10, 11)
        c = CouplingProfile("tabulated", samples_t=tuple(t),
                            samples_value=tuple(np.exp(-5000.0 * np.maximum(t - 5, 0) / 10)))
        val, clamped = c.log_derivative(np.array([6.0]), return_clamped=True)
        assert abs(val[0]) <= 1e3
        assert clamped

    def test_tabulated_zero_is_singular_for_dephased(self):
        c = CouplingProfile("tabulated", samples_t=(0.0, 1.0, 2.0, 3.0),
                            samples_value=(1.0, 1.0, 0.0, 0.0))
        with pytest.raises(SingularLogDerivative):
            gamma1_of_t(MediumParams(gamma_coherence=0.1), c, np.array([2.5]), Model.DEPHASED)


class TestProbe:
    def test_double_hump_exact(self, hump_probe):
        t = np.linspace(0, 2000, 101)
        expected = 0.012 * np.exp(-(t / 100 - 7.5) ** 2) + 0.01 * np.exp(-(t / 100 - 10) ** 2)
        np.testing.assert_allclose(hump_probe.envelope(t), expected, rtol=1e-13, atol=1e-18)

    @pytest.mark.parametrize("probe", [
        ProbeEnvelope("double_gaussian", (0.012, 0.01), (750.0, 1000.0), (100.0, 100.0)),
        ProbeEnvelope("split_gaussian", (1.0, 0.5), (400.0, 700.0), (80.0, 50.0), split=500.0),
        ProbeEnvelope("plateau", (0.005,), (300.0,), (50.0,)),
    ])
    def test_derivative_matches_finite_difference(self, probe):
        t = np.array([300.0, 451.0, 720.0, 905.0])
        h = 1e-3
        fd = (probe.envelope(t + h) - probe.envelope(t - h)) / (2 * h)
        np.testing.assert_allclose(probe.envelope_dot(t), fd, rtol=1e-6, atol=1e-12)

    def test_tabulated_derivative(self):
        ts = np.linspace(0, 100, 401)
        p = ProbeEnvelope("tabulated", samples_t=tuple(ts),
                          samples_value=tuple(np.exp(-((ts - 50) / 10) ** 2)))
        t = np.array([40.0, 55.0])
        exact = -2 * (t - 50) / 100 * np.exp(-((t - 50) / 10) ** 2)
        np.testing.assert_allclose(p.envelope_dot(t), exact, atol=2e-4)

    def test_mixing_angle_divides_by_coupling(self, hump_probe):
        c = CouplingProfile("constant", amplitude=0.5)
        t = np.linspace(500, 1200, 8)
        th, thd = hump_probe.mixing_angle(c, t)
        np.testing.assert_allclose(th, hump_probe.envelope(t) / 0.5)
        np.testing.assert_allclose(thd, hump_probe.envelope_dot(t) / 0.5)

    def test_mixing_flag(self):
        p = ProbeEnvelope("gaussian", (0.01,), (800.0,), (100.0,), mixing=True)
        c = CouplingProfile("switch_off", amplitude=1.0, rate=1.0, t_off=700.0)
        th, _ = p.mixing_angle(c, np.array([800.0]))
        assert th[0] == pytest.approx(0.01)
        assert p.rabi(np.array([800.0]), c)[0] == pytest.approx(0.01 * np.exp(-100.0))

    def test_weak_probe_warning(self):
        with pytest.warns(WeakProbeWarning):
            assert not check_weak_probe(np.array([0.0, 0.2]))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert check_weak_probe(np.array([0.05]))

    def test_bad_probe_parameters(self):
        with pytest.raises(DomainError):
            ProbeEnvelope("double_gaussian", (0.01,), (1.0,), (1.0,))
        with pytest.raises(DomainError):
            ProbeEnvelope("gaussian", (0.01,), (1.0,), (0.0,))
        with pytest.raises(DomainError):
            ProbeEnvelope("split_gaussian", (1.0, 1.0), (1.0, 2.0), (1.0, 1.0))


class TestGamma1:
    def test_constant_coupling(self, medium):
        c = CouplingProfile("constant", amplitude=0.6324)
        assert gamma1_of_t(medium, c, 0.0) == pytest.approx(0.4, rel=2e-4)

    def test_models_agree_without_dephasing(self, medium, storage_coupling):
        t = STORAGE_GRID.times
        a = gamma1_of_t(medium, storage_coupling, t, Model.STANDARD)
        b = gamma1_of_t(medium, storage_coupling, t, Model.DEPHASED)
        assert np.array_equal(a, b)

    def test_dephased_formula(self):
        m = MediumParams(gamma_upper=1.0, gamma_coherence=0.05)
        c = CouplingProfile("switch_off", amplitude=0.7, rate=0.3, t_off=0.0)
        t = 2.0
        om = 0.7 * np.exp(-0.6)
        expected = (om ** 2 + 0.05 * (1.0 - 0.3)) / 1.05
        assert gamma1_of_t(m, c, t, "dephased") == pytest.approx(expected, rel=1e-14)

    def test_switch_off_at_decay_rate_vanishes(self):
        m = MediumParams(gamma_coherence=0.01)
        c = CouplingProfile("switch_off", amplitude=1.0, rate=1.0, t_off=100.0)
        t = np.linspace(110.0, 300.0, 50)
        assert np.max(np.abs(gamma1_of_t(m, c, t, Model.DEPHASED))) <= 1e-6

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 0.5))
    def test_monotone_in_coupling_strength(self, a, b, gam):
        m = MediumParams(gamma_coherence=gam)
        lo, hi = sorted((a, b))
        for model in Model:
            g_lo = gamma1_of_t(m, CouplingProfile("constant", amplitude=lo + 1e-3), 0.0, model)
            g_hi = gamma1_of_t(m, CouplingProfile("constant", amplitude=hi + 1e-3), 0.0, model)
            assert g_hi >= g_lo


class TestAlpha:
    def test_constant_rate(self):
        g = TimeGrid(0, 100, 201)
        rate = np.full(201, 0.3)
        assert alpha_integral(rate, g, 10.0, 70.0) == pytest.approx(18.0, rel=1e-14)
        assert alpha_integral(rate, g, 42.0, 42.0) == 0.0
        assert alpha_integral(rate, g, 10.0, 70.0, gamma_subtract=0.1) == pytest.approx(12.0)

    def test_reversed_interval(self):
        g = TimeGrid(0, 1, 11)
        with pytest.raises(InvalidInterval):
            alpha_integral(np.ones(11), g, 0.8, 0.2)

    def test_storage_coupling_against_adaptive_quadrature(self, medium, storage_coupling):
        rate = gamma1_of_t(medium, storage_coupling, STORAGE_GRID.times)
        got = alpha_integral(rate, STORAGE_GRID, 0.0, 2500.0)
        exact = quad(lambda x: f_reference(x) ** 2, 0, 1000)[0] + quad(
            lambda x: f_reference(x) ** 2, 1000, 2500, points=[1500, 2000], limit=200,
            epsabs=1e-13, epsrel=1e-13)[0]
        assert got == pytest.approx(exact, rel=1e-6)

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 9000), min_size=3, max_size=3))
    def test_additivity(self, idx):
        i, j, k = sorted(idx)
        t = STORAGE_GRID.times
        rate = gamma1_of_t(MediumParams(), CouplingProfile("piecewise"), t)
        cum = CumulativeIntegral(STORAGE_GRID, rate)
        a12 = cum.between(t[i], t[j])
        a23 = cum.between(t[j], t[k])
        a13 = cum.between(t[i], t[k])
        assert abs(a12 + a23 - a13) <= 1e-12 * max(1.0, abs(a13))


class TestXi:
    def test_constant_coupling_delay(self, medium):
        c = CouplingProfile("constant", amplitude=np.sqrt(0.4))
        g = TimeGrid(0, 3000, 4096)
        t = np.array([500.0, 1234.0, 2999.0])
        np.testing.assert_allclose(xi_nonlinear_time(c, t, 40.0, medium, g), t - 100.0,
                                   rtol=0, atol=1e-9)

    def test_zero_depth(self, medium, storage_coupling):
        t = np.array([10.0, 1500.0, 3000.0])
        np.testing.assert_array_equal(
            xi_nonlinear_time(storage_coupling, t, 0.0, medium, STORAGE_GRID), t)

    def test_not_yet_arrived(self, medium, storage_coupling):
        with pytest.raises(NotYetArrived):
            xi_nonlinear_time(storage_coupling, 5.0, 10.0, medium, STORAGE_GRID)
        xi = xi_nonlinear_time(storage_coupling, np.array([5.0, 50.0]), 10.0, medium,
                               STORAGE_GRID)
        assert np.isnan(xi[0]) and xi[1] == pytest.approx(40.0)

    def test_frozen_in_dark_window(self, medium, storage_coupling):
        a = xi_nonlinear_time(storage_coupling, 1400.0, 10.0, medium, STORAGE_GRID)
        b = xi_nonlinear_time(storage_coupling, 1600.0, 10.0, medium, STORAGE_GRID)
        assert 1000.0 < a < 1200.0
        assert b == pytest.approx(a, abs=1e-6)

    @pytest.mark.parametrize("t", [1050.0, 1400.0, 1600.0, 2000.0, 2400.0])
    def test_residual(self, medium, storage_coupling, t):
        z = 10.0
        xi = xi_nonlinear_time(storage_coupling, t, z, medium, STORAGE_GRID)
        pts = [p for p in (1000.0, 1500.0, 2000.0) if xi < p < t]
        got = quad(lambda x: f_reference(x) ** 2, xi, t, points=pts or None, limit=400,
                   epsabs=1e-12, epsrel=1e-12)[0]
        assert got == pytest.approx(z, rel=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.0, 200.0), st.floats(0.0, 200.0))
    def test_monotone_in_time_and_depth(self, z1, z2):
        medium = MediumParams()
        c = CouplingProfile("piecewise")
        t = np.linspace(0, 4500, 301)
        cum = opacity_integral(medium, c, STORAGE_GRID)
        lo, hi = sorted((z1, z2))
        x_lo = xi_nonlinear_time(c, t, lo, medium, STORAGE_GRID, cum)
        x_hi = xi_nonlinear_time(c, t, hi, medium, STORAGE_GRID, cum)
        for x in (x_lo, x_hi):
            v = x[~np.isnan(x)]
            assert np.all(np.diff(v) >= -1e-9)
            assert np.all(v <= t[~np.isnan(x)])
        both = ~np.isnan(x_hi)
        assert np.all(x_hi[both] <= x_lo[both] + 1e-9)


class TestGrid:
    def test_validation(self):
        with pytest.raises(DomainError):
            TimeGrid(0, 1, 1)
        with pytest.raises(DomainError):
            TimeGrid(1, 0, 10)

    def test_refined_keeps_points(self):
        g = TimeGrid(0, 10, 11)
        r = g.refined()
        assert r.dt == pytest.approx(0.5)
        np.testing.assert_array_equal(r.times[::2], g.times)

    def test_tail_warning(self):
        g = TimeGrid(0, 100, 101)
        assert g.tail_warning(np.exp(-((g.times - 50) / 5) ** 2)) is None
        assert "widen" in g.tail_warning(np.exp(-((g.times - 5) / 5) ** 2))
