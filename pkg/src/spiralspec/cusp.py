"""Small-alpha expansion of the essential spectrum near its cusp points.

With ``alpha = 1 / gamma`` and no slow-variable diffusion, the branch through
``gbar`` behaves like

    lambda(alpha) = gbar + lambda2 alpha^2 + 2i lambda3 alpha^3 + O(alpha^4),

    lambda2 = <f2 g1>,     lambda3 = <f2' g1>,

where ``<.>`` is the period average. Copies of the cusp sit at
``gbar + i omega0 n``. For small ``delta > 0`` the branch instead follows a
curve parameterised by ``s`` (see :func:`theorem2_curve`).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import fourier
from .errors import DegenerateExpansionError, DomainError, InsufficientDataError

ALPHA_WARN = 0.5
S0_DEFAULT = 0.3
CONSTANT_TOL = 1e-13


@dataclass(frozen=True)
class CuspExpansion:
    gbar: float
    lambda2: float
    lambda3: float
    kappa: float
    omega: float
    omega0: float

    def as_dict(self):
        return {"gbar": self.gbar, "lambda2": self.lambda2, "lambda3": self.lambda3,
                "kappa": self.kappa, "omega": self.omega, "omega0": self.omega0}


@dataclass(frozen=True)
class SplitBranchPoint:
    s: float
    delta: float
    alpha_star: float
    lambda_star: complex


@dataclass(frozen=True)
class OrderFit:
    """Log-log slopes of ``Re`` and ``Im`` of ``lambda - lambda0`` against ``alpha``.

    ``c2`` and ``c3`` are the leading least-squares coefficients of
    ``Re = c2 alpha^2 + c4 alpha^4`` and ``Im = c3 alpha^3 + c5 alpha^5`` over
    the same window; they estimate ``lambda2`` and ``2 lambda3``. Unpacks as
    ``(p_real, p_imag)``.
    """

    p_real: float
    p_imag: float
    r2_real: float
    r2_imag: float
    c2: float
    c3: float
    n_points: int

    def __iter__(self):
        return iter((self.p_real, self.p_imag))

    def as_dict(self):
        return {"p_real": self.p_real, "p_imag": self.p_imag,
                "r2_real": self.r2_real, "r2_imag": self.r2_imag}


def gbar(g2):
    """Period average of equispaced periodic samples."""
    g2 = np.asarray(g2, dtype=float)
    if g2.size == 0:
        raise DegenerateExpansionError("gbar of an empty sample array")
    return float(np.mean(g2))


def lambda2(coeffs):
    """``<f2 g1>`` by the (spectrally accurate) periodic trapezoidal rule."""
    return float(np.mean(coeffs.f2 * coeffs.g1))


def lambda3(coeffs):
    """``<f2' g1>``; exactly zero when ``g1`` is constant."""
    g1 = np.asarray(coeffs.g1)
    if np.ptp(g1) < CONSTANT_TOL:
        return 0.0
    df2 = fourier.diff(coeffs.f2, coeffs.period)
    return float(np.mean(df2 * g1))


def expansion(coeffs, omega0=None):
    """Collect ``gbar, lambda2, lambda3`` of sampled coefficients.

    ``omega0`` defaults to ``omega * kappa``, the temporal frequency of the
    wave train.
    """
    if omega0 is None:
        omega0 = coeffs.omega * coeffs.kappa
    return CuspExpansion(gbar=gbar(coeffs.g2), lambda2=lambda2(coeffs), lambda3=lambda3(coeffs),
                         kappa=coeffs.kappa, omega=coeffs.omega, omega0=float(omega0))


def cusp_points(exp, n_range):
    """``gbar + i omega0 n`` for ``n`` in ``n_range`` (any integer iterable)."""
    return [complex(exp.gbar, exp.omega0 * n) for n in n_range]


def predicted_dispersion(exp, alpha, n=0):
    """``gbar + i omega0 n + lambda2 alpha^2 + 2i lambda3 alpha^3``."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.abs(alpha) > ALPHA_WARN):
        warnings.warn(f"|alpha| > {ALPHA_WARN} is outside the asymptotic range", stacklevel=2)
    lam = np.asarray(exp.gbar + 1j * exp.omega0 * n + exp.lambda2 * alpha**2
                     + 2j * exp.lambda3 * alpha**3, dtype=complex)
    return complex(lam) if lam.ndim == 0 else lam


def _cumulative_with_end(f, period):
    inner = fourier.cumulative_integral(f, period)
    return np.append(inner, np.mean(f) * period)


def eigenfunction_expansion(coeffs, exp, alpha, endpoint=False):
    """Leading terms of the eigenfunction on the branch.

    ``u = alpha^2 f2 + 2i alpha^3 f2'`` and
    ``v = 1 + alpha^2 v2 + 2i alpha^3 v3`` with
    ``v2 = (lambda2 x - int_0^x f2 g1) / omega`` and
    ``v3 = (lambda3 x - int_0^x f2' g1) / omega``. With ``endpoint=True``
    the samples include ``x = period``.
    """
    period = coeffs.period
    f2 = np.asarray(coeffs.f2)
    df2 = fourier.diff(f2, period)
    x = np.append(fourier.grid(coeffs.n, period), period)
    i2 = _cumulative_with_end(f2 * coeffs.g1, period)
    i3 = _cumulative_with_end(df2 * coeffs.g1, period)
    f2 = np.append(f2, f2[0])
    df2 = np.append(df2, df2[0])
    if not endpoint:
        x, i2, i3, f2, df2 = x[:-1], i2[:-1], i3[:-1], f2[:-1], df2[:-1]
    v2 = (exp.lambda2 * x - i2) / exp.omega
    v3 = (exp.lambda3 * x - i3) / exp.omega
    u = alpha**2 * f2 + 2j * alpha**3 * df2
    v = 1.0 + alpha**2 * v2 + 2j * alpha**3 * v3
    return u, v


def alpha_star(s, delta):
    return 0.5 * (s + np.sqrt(s * s + 4.0 * np.sqrt(delta)))


def theorem2_curve(exp, s, delta, s0=S0_DEFAULT, form="scaled"):
    """Leading-order point of the small-``delta`` branch at parameter ``s``.

    ``alpha_star = (s + sqrt(s^2 + 4 sqrt(delta))) / 2``. For ``s >= 0`` the
    point follows the ``delta = 0`` cusp, ``predicted_dispersion(|s|)``. For
    ``s < 0`` it runs along the real segment left of ``gbar``:
    ``gbar - s^2 / omega`` with ``form="scaled"`` or ``gbar - s^2`` with
    ``form="direct"`` (the value obtained when the ``beta^2`` shift is carried
    through the reduction; it matches the computed Bloch spectrum).
    """
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if abs(s) > s0:
        raise DomainError(f"|s| = {abs(s)} exceeds s0 = {s0}")
    a = float(alpha_star(s, delta))
    if s >= 0:
        lam = predicted_dispersion(exp, abs(s))
    elif form == "scaled":
        lam = complex(exp.gbar - s * s / exp.omega)
    elif form == "direct":
        lam = complex(exp.gbar - s * s)
    else:
        raise ValueError(f"unknown form {form!r}")
    return SplitBranchPoint(s=float(s), delta=float(delta), alpha_star=a, lambda_star=complex(lam))


def wavetrain_limit(exp, alpha, n=0):
    """Wave-train-frame counterpart ``predicted_dispersion(alpha) + i omega / alpha``."""
    if alpha == 0:
        raise DomainError("the wave-train limit is unbounded at alpha = 0")
    return predicted_dispersion(exp, alpha, n) + 1j * exp.omega / alpha


def _loglog(a, y):
    mask = np.abs(y) > 0
    if mask.sum() < 2:
        return np.nan, np.nan
    la, ly = np.log(a[mask]), np.log(np.abs(y[mask]))
    slope, intercept = np.polyfit(la, ly, 1)
    pred = slope * la + intercept
    ss_res = np.sum((ly - pred) ** 2)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(r2)


def fit_convergence_orders(curve, lambda0, alpha_window=(0.02, 0.2)):
    """Least-squares convergence orders of a traced branch towards ``lambda0``.

    ``curve`` is a :class:`~spiralspec.blochspec.SpectralCurve` (or any object
    with ``gamma`` and ``lam`` arrays); points with ``|1/gamma|`` inside the
    window are used.
    """
    gamma = np.asarray(curve.gamma, dtype=float)
    lam = np.asarray(curve.lam, dtype=complex)
    with np.errstate(divide="ignore"):
        alpha = 1.0 / gamma
    lo, hi = alpha_window
    mask = np.isfinite(alpha) & (np.abs(alpha) >= lo) & (np.abs(alpha) <= hi)
    if mask.sum() < 5:
        raise InsufficientDataError(
            f"only {int(mask.sum())} points with alpha in [{lo}, {hi}]; need at least 5"
        )
    a = alpha[mask]
    d = lam[mask] - lambda0
    p_re, r2_re = _loglog(np.abs(a), d.real)
    p_im, r2_im = _loglog(np.abs(a), d.imag)
    # conjugation symmetry makes Re(lambda) even and Im(lambda) odd in alpha
    c2 = float(np.linalg.lstsq(np.column_stack([a**2, a**4]), d.real, rcond=None)[0][0])
    c3 = float(np.linalg.lstsq(np.column_stack([a**3, a**5]), d.imag, rcond=None)[0][0])
    return OrderFit(p_real=p_re, p_imag=p_im, r2_real=r2_re, r2_imag=r2_im,
                    c2=c2, c3=c3, n_points=int(mask.sum()))
