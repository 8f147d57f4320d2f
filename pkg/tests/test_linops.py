"""Tests for the explicit periodic solution operators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiralspec import cusp, fourier, linops, oracles
from spiralspec.errors import (
    ContractionError,
    DomainError,
    NotHyperbolicError,
    SplittingError,
)
from spiralspec.kinetics import PeriodicCoefficients


def manufactured(f2=np.cos, g1=lambda x: 1.0 + np.cos(x), n=64):
    return PeriodicCoefficients.from_functions(0.0, f2, g1, -1.0, kappa=1.0, omega=2.0, n=n)


class TestPeriodicLinear:
    def test_constant_forcing(self):
        sys_ = linops.HyperbolicSystem(np.diag([-1.0, 1.0]), 2 * np.pi)
        u = linops.solve_periodic_linear(sys_, np.tile([1.0, 0.0], (16, 1)))
        assert np.allclose(u, np.tile([1.0, 0.0], (16, 1)))

    def test_fourier_mode(self):
        kappa = 1.3
        period = 2 * np.pi / kappa
        x = fourier.grid(32, period)
        g = np.zeros((32, 2), complex)
        g[:, 0] = np.exp(1j * kappa * x)
        u = linops.solve_periodic_linear(linops.HyperbolicSystem(np.diag([-1.0, 1.0]), period), g)
        assert np.allclose(u[:, 0], np.exp(1j * kappa * x) / (1j * kappa + 1))
        assert np.allclose(u[:, 1], 0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_residual(self, seed):
        rng = np.random.default_rng(seed)
        period = rng.uniform(0.5, 8.0)
        a = oracles.random_hyperbolic(rng, 3)
        g = oracles.random_smooth(rng, 32, period, 3)
        sys_ = linops.HyperbolicSystem(a, period)
        u = linops.solve_periodic_linear(sys_, g)
        assert linops.periodic_residual(sys_, u, g) < 1e-8 * np.max(np.abs(g))

    def test_not_hyperbolic(self):
        with pytest.raises(NotHyperbolicError):
            linops.HyperbolicSystem(np.array([[0.0, 1.0], [-1.0, 0.0]]), 1.0)

    def test_near_hyperbolic_warns(self):
        with pytest.warns(linops.ConditioningWarning):
            linops.HyperbolicSystem(np.diag([1e-6, -1.0]), 1.0)


class TestSecondOrder:
    def test_constant(self):
        u, _ = linops.solve_second_order(1.0, 0.0, np.full(16, 2.0), 2 * np.pi)
        assert np.allclose(u, -2.0)

    def test_cosine(self):
        x = fourier.grid(32, 2 * np.pi)
        u, _ = linops.solve_second_order(1.0, 0.0, np.cos(x), 2 * np.pi)
        assert np.allclose(u, -np.cos(x) / 2.0)

    def test_norm_bound(self, rng):
        g = np.stack([oracles.random_smooth(rng, 32, 3.0) for _ in range(50)], axis=1)
        u, bound = linops.solve_second_order(2.0 + 1j, 0.5, g, 3.0)
        ratios = np.max(np.abs(u), axis=0) / np.max(np.abs(g), axis=0)
        assert np.all(ratios <= bound)

    def test_no_split(self):
        with pytest.raises(NotHyperbolicError):
            linops.solve_second_order(-1.0, -3.0, np.ones(8), 1.0)


class TestTalpha:
    def test_constant(self):
        a = 0.1
        u = linops.solve_talpha(a, 2.0, np.full(32, 3.0), 2 * np.pi)
        assert np.allclose(u, -a**2 * 3.0)

    def test_remainder_order(self):
        assert oracles.talpha_remainder_slope() >= 3.8

    def test_eigenvalue_asymptotics(self):
        devs = [abs(oracles.talpha_eigenvalue_ratio(a) - 1) for a in (1e-2, 1e-3, 1e-4)]
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 0.02

    def test_zero_alpha(self):
        with pytest.raises(DomainError):
            linops.solve_talpha(0.0, 1.0, np.ones(8), 1.0)


class TestDAndC:
    def test_problem_domain(self):
        c = manufactured()
        with pytest.raises(DomainError):
            linops.ScalarPeriodicProblem(-1.0, 0.0, c)
        with pytest.raises(DomainError):
            linops.ScalarPeriodicProblem(-1.0 + 1j, 0.1, c)

    def test_zero_f2_gives_zero_u(self):
        c = manufactured(f2=0.0)
        prob = linops.ScalarPeriodicProblem(-0.5, 0.1, c)
        assert np.allclose(linops.solve_D(prob, np.ones(c.n)), 0)

    def test_contraction_failure(self):
        c = manufactured()
        prob = linops.ScalarPeriodicProblem(-9.0, 0.5, c, alpha_max=0.5)
        with pytest.raises(ContractionError):
            linops.solve_D(prob, np.ones(c.n))

    def test_d_expansion_order(self):
        # u = D v with v = 1 approaches alpha^2 f2 + 2i alpha^3 f2' at fourth order
        c = manufactured(n=128)
        df2 = fourier.diff(c.f2, c.period)
        alphas = np.array([0.02, 0.04, 0.08])
        errs = []
        for a in alphas:
            lam = linops.find_lambda_root(c, a)
            u = linops.solve_D(linops.ScalarPeriodicProblem(lam, a, c), np.ones(c.n))
            errs.append(np.max(np.abs(u - (a**2 * c.f2 + 2j * a**3 * df2))))
        slope = np.polyfit(np.log(alphas), np.log(errs), 1)[0]
        assert slope > 3.5

    def test_decoupled_slow_equation(self):
        c = manufactured(g1=0.0)
        lam = -0.7 + 0.2j
        v, delta = linops.solve_C_and_delta(linops.ScalarPeriodicProblem(lam, 0.1, c))
        x = np.append(c.x, c.period)
        assert np.allclose(v, np.exp((lam + 1.0) * x / 2.0))
        assert delta == pytest.approx(np.exp(2 * np.pi * (lam + 1.0) / 2.0) - 1)

    def test_norm_orders(self):
        assert oracles.d_norm_slope() >= 1.0
        assert oracles.c_deviation_slope() >= 1.0


class TestRoot:
    def test_decoupled_root(self):
        c = manufactured(f2=0.0)
        for a in (0.05, 0.2):
            assert linops.find_lambda_root(c, a) == pytest.approx(-1.0, abs=1e-10)

    def test_root_is_a_zero(self):
        c = manufactured()
        lam = linops.find_lambda_root(c, 0.1)
        assert abs(linops.delta_function(c, 0.1)(lam)) < 1e-9

    def test_lambda2_limit(self):
        c = manufactured(n=128)
        ratios = [(linops.find_lambda_root(c, a) + 1.0).real / a**2 for a in (0.1, 0.05)]
        assert abs(ratios[1] - 0.5) < abs(ratios[0] - 0.5)
        assert ratios[1] == pytest.approx(0.5, abs=0.01)

    def test_agrees_with_expansion(self):
        c = manufactured(n=128)
        exp = cusp.expansion(c)
        a = 0.05
        assert abs(linops.find_lambda_root(c, a) - cusp.predicted_dispersion(exp, a)) < 10 * a**4


class TestCenterStable:
    def test_zero_forcing(self):
        v, s = linops.solve_center_stable(-0.02j * -3.0, 0.02j - 3.0, np.zeros(16), 4.0)
        assert np.allclose(v, 0) and s == 0

    def test_constant_forcing_closed_form(self):
        # b21 = 0: v'' = b22 v' + h with h = 1 is solved by the linear drift v = -x / b22
        b22 = -4.0
        v, s = linops.solve_center_stable(0.0, b22, np.ones(32), 2.0)
        x = np.append(fourier.grid(32, 2.0), 2.0)
        assert np.allclose(v - v[0], -x / b22, atol=1e-12)

    def test_fredholm_alternative(self):
        x = fourier.grid(32, 2 * np.pi)
        _, s0 = linops.solve_center_stable(0.0, -3.0, np.sin(x), 2 * np.pi)
        _, s1 = linops.solve_center_stable(0.0, -3.0, 1.0 + np.sin(x), 2 * np.pi)
        assert abs(s0) < 1e-12 and abs(s1) > 1e-3

    def test_wrong_splitting(self):
        with pytest.raises(SplittingError):
            linops.center_stable_split(1.0, 0.0)

    def test_periodic_amplitude(self, rng):
        h = oracles.random_smooth(rng, 32, 3.0)
        a_c = linops.center_amplitude(-0.05 * -2.0, 0.05 - 2.0, h, 3.0)
        v, s = linops.solve_center_stable(-0.05 * -2.0, 0.05 - 2.0, h, 3.0, a_c)
        assert abs(s) < 1e-12 and abs(v[-1] - v[0]) < 1e-10


class TestOracleSuite:
    def test_all_checks_pass(self):
        checks = oracles.run_suite(seed=7, n_instances=5)
        failed = [c.name for c in checks if not c.passed]
        assert not failed
