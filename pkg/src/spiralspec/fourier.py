"""Fourier collocation on one period of a periodic grid.

All routines assume ``n`` equispaced samples on ``[0, period)``.
"""

import numpy as np
from scipy import fft


def grid(n, period):
    """Equispaced collocation points on ``[0, period)``."""
    return np.arange(n) * (period / n)


def wavenumbers(n, period):
    """Angular wavenumbers in FFT order; the Nyquist mode carries ``-pi n / period``."""
    return 2.0 * np.pi * fft.fftfreq(n, d=period / n)


def diff(f, period, order=1):
    """Spectral derivative of periodic samples.

    The Nyquist coefficient is dropped for odd orders so that real input gives
    real output.
    """
    f = np.asarray(f)
    n = f.shape[-1]
    k = wavenumbers(n, period)
    symbol = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        symbol[n // 2] = 0.0
    out = fft.ifft(symbol * fft.fft(f, axis=-1), axis=-1)
    if np.isrealobj(f):
        return out.real
    return out


def diff_matrix(n, period, order=1):
    """Dense differentiation matrix matching :func:`diff`."""
    return diff(np.eye(n), period, order).T


def symbol_matrix(symbol):
    """Dense matrix of the Fourier multiplier with FFT-ordered ``symbol``.

    ``M @ f == ifft(symbol * fft(f))`` for any vector ``f``.
    """
    n = len(symbol)
    f = fft.fft(np.eye(n), axis=0)
    return fft.ifft(symbol[:, None] * f, axis=0)


def mean(f):
    """Period average; exact trapezoidal rule for periodic samples."""
    return np.mean(f, axis=-1)


def cumulative_integral(f, period):
    """``F(x) = int_0^x f(y) dy`` at the grid points, spectrally accurate.

    The mean part integrates to ``mean * x``; the oscillatory part uses the
    periodic antiderivative shifted to vanish at ``x = 0``.
    """
    f = np.asarray(f)
    n = len(f)
    k = wavenumbers(n, period)
    c = fft.fft(f)
    inv = np.zeros(n, dtype=complex)
    nz = k != 0
    inv[nz] = 1.0 / (1j * k[nz])
    if n % 2 == 0:
        inv[n // 2] = 0.0
    periodic = fft.ifft(c * inv)
    out = periodic - periodic[0] + (c[0] / n) * grid(n, period)
    if np.isrealobj(f):
        return out.real
    return out


def interpolant(f, period):
    """Trigonometric interpolant of periodic samples as a vectorised callable.

    Samples run along the last axis; evaluating at ``x`` of shape ``s`` returns
    leading axes followed by ``s``.
    """
    f = np.asarray(f)
    n = f.shape[-1]
    c = fft.fft(f, axis=-1) / n
    k = wavenumbers(n, period)
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real data interpolates to real values
        k = np.concatenate([k, [-k[n // 2]]])
        c = np.concatenate([c, c[..., n // 2: n // 2 + 1] / 2], axis=-1)
        c[..., n // 2] /= 2
    real = np.isrealobj(f)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        vals = np.tensordot(c, np.exp(1j * np.multiply.outer(k, x)), axes=(-1, 0))
        return vals.real if real else vals

    return evaluate
