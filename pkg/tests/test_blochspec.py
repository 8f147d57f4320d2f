"""Tests for Bloch operators and essential-spectrum tracing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiralspec import blochspec, fourier
from spiralspec.errors import AmbiguityError
from spiralspec.kinetics import PeriodicCoefficients

RESOLVED = 100.0


def resolved(ev, radius=RESOLVED):
    return ev[np.abs(ev) < radius]


def constant_coeffs(jac, kappa=1.0, omega=1.5, delta=0.0, n=16):
    (f1, f2), (g1, g2) = jac
    return PeriodicCoefficients.from_functions(f1, f2, g1, g2, kappa, omega, delta, n)


class TestConstantCoefficients:
    @settings(max_examples=25, deadline=None)
    @given(st.floats(-2, 2), st.floats(0.0, 0.5), st.sampled_from(["spiral", "wavetrain"]))
    def test_closed_form_dispersion(self, gamma, delta, frame):
        jac = np.array([[-0.5, 1.0], [0.3, -1.0]])
        c = constant_coeffs(jac, kappa=0.8, omega=1.5, delta=delta, n=16)
        ev = blochspec.eigenvalues_at(c, gamma, frame)
        k = fourier.wavenumbers(16, c.period)
        drift = k + gamma if frame == "wavetrain" else k
        expected = []
        for kj, dj in zip(k, drift):
            m = jac + np.diag([-(kj + gamma) ** 2, -delta * (kj + gamma) ** 2]) + 1.5j * dj * np.eye(2)
            expected.extend(np.linalg.eigvals(m))
        assert blochspec.set_distance(ev, np.array(expected)) < 1e-9
        assert blochspec.set_distance(np.array(expected), ev) < 1e-9

    def test_frames_differ_by_drift(self):
        c = constant_coeffs(np.array([[-1.0, 0.5], [1.0, -2.0]]), n=8)
        sp = blochspec.eigenvalues_at(c, 0.3, "spiral")
        wt = blochspec.eigenvalues_at(c, 0.3, "wavetrain")
        assert blochspec.set_distance(wt, sp + 1j * c.omega * 0.3) < 1e-12

    def test_unknown_frame(self):
        c = constant_coeffs(np.eye(2), n=8)
        with pytest.raises(ValueError):
            blochspec.build_bloch_matrix(c, 0.0, "lab")


class TestBarkleySymmetries:
    def test_translation_eigenvalue(self, barkley_coeffs):
        assert np.min(np.abs(blochspec.eigenvalues_at(barkley_coeffs, 0.0))) < 1e-6

    @pytest.mark.parametrize("frame", ["spiral", "wavetrain"])
    def test_floquet_shift(self, barkley_coeffs, frame):
        c = barkley_coeffs
        a = blochspec.eigenvalues_at(c, 0.37, frame)
        b = blochspec.eigenvalues_at(c, 0.37 + c.kappa, frame)
        if frame == "spiral":
            b = b + 1j * c.omega * c.kappa
        assert blochspec.set_distance(resolved(a), b) < 1e-8
        assert blochspec.set_distance(resolved(b), a) < 1e-8

    def test_conjugation(self, barkley_coeffs):
        a = blochspec.eigenvalues_at(barkley_coeffs, 0.41)
        b = blochspec.eigenvalues_at(barkley_coeffs, -0.41).conj()
        assert blochspec.set_distance(resolved(a), b) < 1e-8

    def test_local_matches_dense(self, barkley_coeffs):
        dense = blochspec.eigenvalues_at(barkley_coeffs, 2.0)
        target = dense[np.argmin(np.abs(dense + 1.0))]
        local = blochspec.eigenvalues_near(barkley_coeffs, 2.0, target + 0.01, k=3)
        assert np.min(np.abs(local - target)) < 1e-9


class TestTracing:
    def test_curve_starts_at_zero(self, barkley_curve):
        assert abs(barkley_curve.lam[0]) < 1e-8
        assert barkley_curve.gamma[-1] == pytest.approx(60.0)

    def test_tail_tends_to_cusp(self, barkley_curve):
        tail = barkley_curve.lam[barkley_curve.gamma > 40]
        assert np.all(np.abs(tail.real + 1.0) < 0.01)

    def test_wavetrain_frame_curve(self, barkley_coeffs):
        c = barkley_coeffs
        curve = blochspec.wavetrain_frame_curve(c, (0.0, 2.0), 0.1, method="local")
        assert curve.frame == "wavetrain"
        for g, lam in zip(curve.gamma[::5], curve.lam[::5]):
            sp = blochspec.eigenvalues_near(c, g, lam - 1j * c.omega * g, k=1)
            assert abs(sp[0] - (lam - 1j * c.omega * g)) < 1e-8

    def test_spiral_copies_shift_by_omega0(self, barkley_curve):
        a = blochspec.to_spiral_frame(barkley_curve, 2.09, -1)
        b = blochspec.to_spiral_frame(barkley_curve, 2.09, 1)
        assert np.allclose(b.lam.imag - a.lam.imag, 2 * 2.09)
        assert b.ell == 1

    def test_ambiguous_start(self, barkley_coeffs):
        with pytest.raises(AmbiguityError):
            blochspec.trace_branch(barkley_coeffs, 1e6, (0.0, 1.0), 0.1)

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            blochspec.SpectralCurve(np.array([0.0, 1.0, 0.5]), np.zeros(3, complex))
        with pytest.raises(ValueError):
            blochspec.SpectralCurve(np.array([0.0, 1.0]), np.zeros(3, complex))

    def test_delta_sweep(self, barkley_wt):
        from spiralspec import kinetics, wavetrain

        model = kinetics.get_model("barkley")
        family = wavetrain.continue_in_delta(model, barkley_wt, [0.05, 0.1])
        curves = blochspec.delta_sweep(model, family, (0.0, 3.0), 0.1, method="local")
        assert [c.delta for c in curves] == [0.05, 0.1]
        assert all(c.gamma[-1] == pytest.approx(3.0) for c in curves)
