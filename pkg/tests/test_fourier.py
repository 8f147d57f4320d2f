"""Tests for Fourier collocation helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiralspec import fourier


class TestDifferentiation:
    def test_derivative_of_trig_mode(self):
        period = 3.0
        x = fourier.grid(32, period)
        k = 2 * np.pi / period
        assert np.allclose(fourier.diff(np.sin(2 * k * x), period), 2 * k * np.cos(2 * k * x))

    def test_second_derivative(self):
        x = fourier.grid(16, 2 * np.pi)
        assert np.allclose(fourier.diff(np.cos(3 * x), 2 * np.pi, order=2), -9 * np.cos(3 * x))

    def test_matrix_matches_fft(self, rng):
        f = rng.normal(size=24)
        d = fourier.diff_matrix(24, 5.0)
        assert np.allclose(d @ f, fourier.diff(f, 5.0))

    def test_real_input_gives_real_output(self, rng):
        assert np.isrealobj(fourier.diff(rng.normal(size=16), 1.0))


class TestSymbolMatrix:
    def test_acts_as_multiplier(self, rng):
        symbol = rng.normal(size=12) + 1j * rng.normal(size=12)
        f = rng.normal(size=12)
        assert np.allclose(fourier.symbol_matrix(symbol) @ f,
                           np.fft.ifft(symbol * np.fft.fft(f)))


class TestIntegrals:
    def test_cumulative_integral_of_cos(self):
        x = fourier.grid(32, 2 * np.pi)
        assert np.allclose(fourier.cumulative_integral(np.cos(x), 2 * np.pi), np.sin(x))

    def test_cumulative_integral_mean_part(self):
        x = fourier.grid(16, 4.0)
        assert np.allclose(fourier.cumulative_integral(np.full(16, 2.0), 4.0), 2.0 * x)

    def test_mean(self):
        x = fourier.grid(20, 2 * np.pi)
        assert fourier.mean(1.5 + np.sin(x)) == pytest.approx(1.5)


class TestInterpolant:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 10.0), st.integers(1, 7))
    def test_exact_for_resolved_modes(self, x0, m):
        period = 2 * np.pi
        x = fourier.grid(16, period)
        f = np.cos(m * x) + 0.3 * np.sin(m * x)
        val = fourier.interpolant(f, period)(x0)
        assert val == pytest.approx(np.cos(m * x0) + 0.3 * np.sin(m * x0), abs=1e-12)

    def test_stacked_samples(self):
        x = fourier.grid(8, 1.0)
        f = np.stack([np.ones(8), np.cos(2 * np.pi * x)])
        out = fourier.interpolant(f, 1.0)(np.array([0.0, 0.5, 0.25]))
        assert out.shape == (2, 3)
        assert np.allclose(out[1], [1.0, -1.0, 0.0])
