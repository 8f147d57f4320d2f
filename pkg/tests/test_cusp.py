"""Tests for the small-alpha cusp expansion."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiralspec import blochspec, cusp
from spiralspec.errors import DegenerateExpansionError, DomainError, InsufficientDataError
from spiralspec.kinetics import PeriodicCoefficients


def coeffs(f2, g1, g2=-1.0, n=64):
    return PeriodicCoefficients.from_functions(0.0, f2, g1, g2, kappa=1.0, omega=2.0, n=n)


class TestQuadratures:
    def test_closed_form_lambda2(self):
        c = coeffs(np.cos, lambda x: 1.0 + np.cos(x))
        assert cusp.lambda2(c) == pytest.approx(0.5, abs=1e-14)

    def test_closed_form_lambda3(self):
        c = coeffs(np.cos, lambda x: 1.0 + np.sin(x))
        assert cusp.lambda2(c) == pytest.approx(0.0, abs=1e-14)
        assert cusp.lambda3(c) == pytest.approx(-0.5, abs=1e-14)

    def test_constant_g1_gives_zero_lambda3(self, barkley_coeffs):
        exp = cusp.expansion(barkley_coeffs)
        assert exp.lambda3 == 0.0
        assert exp.gbar == -1.0

    def test_karma_expansion(self, karma_coeffs):
        exp = cusp.expansion(karma_coeffs)
        assert exp.gbar == -4.0
        assert exp.lambda3 < 0

    def test_empty_gbar(self):
        with pytest.raises(DegenerateExpansionError):
            cusp.gbar([])

    def test_default_omega0(self):
        c = coeffs(np.cos, 1.0)
        assert cusp.expansion(c).omega0 == pytest.approx(2.0)


class TestDispersion:
    def test_cusp_points(self):
        exp = cusp.CuspExpansion(-1.0, -3.0, 0.0, 0.6, 3.4, 2.09)
        pts = cusp.cusp_points(exp, range(-1, 2))
        assert pts == [complex(-1, -2.09), complex(-1, 0), complex(-1, 2.09)]

    def test_predicted_dispersion_scalar_and_array(self):
        exp = cusp.CuspExpansion(-1.0, 0.5, 0.25, 1.0, 2.0, 2.0)
        a = 0.1
        assert cusp.predicted_dispersion(exp, a) == pytest.approx(-1 + 0.5 * a**2 + 0.5j * a**3)
        arr = cusp.predicted_dispersion(exp, np.array([0.1, 0.2]))
        assert arr.shape == (2,)

    def test_large_alpha_warns(self):
        exp = cusp.CuspExpansion(-1.0, 0.5, 0.0, 1.0, 2.0, 2.0)
        with pytest.warns(UserWarning):
            cusp.predicted_dispersion(exp, 0.9)

    def test_eigenfunction_expansion(self):
        c = coeffs(np.cos, lambda x: 1.0 + np.sin(x), n=128)
        exp = cusp.expansion(c)
        u, v = cusp.eigenfunction_expansion(c, exp, 0.1)
        assert u.shape == v.shape == (128,)
        # fast component is O(alpha^2), slow component is a unit perturbation
        u2, v2 = cusp.eigenfunction_expansion(c, exp, 0.05)
        assert np.max(np.abs(u2)) < np.max(np.abs(u))
        assert np.max(np.abs(u)) / np.max(np.abs(u2)) == pytest.approx(4.0, rel=0.2)
        assert abs(np.mean(v) - 1.0) < 0.1
        ue, ve = cusp.eigenfunction_expansion(c, exp, 0.1, endpoint=True)
        assert ue.shape == (129,) and ve[-1] == pytest.approx(ve[0])


class TestSmallDeltaBranch:
    def test_alpha_star(self):
        assert cusp.alpha_star(0.0, 1e-4) == pytest.approx(0.1)

    def test_forms(self):
        exp = cusp.CuspExpansion(-1.0, 0.0, -0.5, 1.0, 2.0, 2.0)
        st_pt = cusp.theorem2_curve(exp, -0.2, 1e-3)
        pr_pt = cusp.theorem2_curve(exp, -0.2, 1e-3, form="direct")
        assert st_pt.lambda_star == pytest.approx(-1 - 0.04 / 2.0)
        assert pr_pt.lambda_star == pytest.approx(-1 - 0.04)
        pos = cusp.theorem2_curve(exp, 0.1, 1e-3)
        assert pos.lambda_star == pytest.approx(cusp.predicted_dispersion(exp, 0.1))

    def test_domain(self):
        exp = cusp.CuspExpansion(-1.0, 0.0, -0.5, 1.0, 2.0, 2.0)
        with pytest.raises(DomainError):
            cusp.theorem2_curve(exp, 0.1, 0.0)
        with pytest.raises(DomainError):
            cusp.theorem2_curve(exp, 0.5, 1e-3)
        with pytest.raises(ValueError):
            cusp.theorem2_curve(exp, -0.1, 1e-3, form="other")

    def test_wavetrain_limit(self):
        exp = cusp.CuspExpansion(-1.0, 0.0, 0.0, 1.0, 2.0, 2.0)
        assert cusp.wavetrain_limit(exp, 0.1) == pytest.approx(-1 + 20j)
        with pytest.raises(DomainError):
            cusp.wavetrain_limit(exp, 0.0)


class TestFit:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(-5, -0.1), st.floats(0.1, 3.0), st.sampled_from([1, -1]))
    def test_recovers_synthetic_orders(self, l2, l3, sign):
        gamma = np.linspace(5.0, 50.0, 200)
        a = 1.0 / gamma
        lam = -1.0 + l2 * a**2 + 2j * sign * l3 * a**3
        fit = cusp.fit_convergence_orders(blochspec.SpectralCurve(gamma, lam), -1.0)
        assert fit.p_real == pytest.approx(2.0, abs=1e-9)
        assert fit.p_imag == pytest.approx(3.0, abs=1e-9)
        assert fit.c2 == pytest.approx(l2, rel=1e-9)
        assert fit.c3 == pytest.approx(2 * sign * l3, rel=1e-9)
        p_re, p_im = fit
        assert (p_re, p_im) == (fit.p_real, fit.p_imag)

    def test_insufficient_points(self):
        curve = blochspec.SpectralCurve(np.array([1.0, 2.0, 3.0]), np.zeros(3, complex))
        with pytest.raises(InsufficientDataError):
            cusp.fit_convergence_orders(curve, -1.0)
