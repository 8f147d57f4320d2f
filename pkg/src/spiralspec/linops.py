"""Explicit periodic solution operators behind the cusp expansion.

The building block is the periodic solution of ``U' = A U + G(x)`` for a
hyperbolic matrix ``A``, written with the stable and unstable spectral
projections ``P^s, P^u`` as variation-of-constants integrals. Only decaying
exponentials (``e^{Ax} P^s`` for ``x >= 0`` and ``e^{Ax} P^u`` for ``x <= 0``)
are ever formed. The integrals are evaluated exactly for the trigonometric
interpolant of ``G`` on the collocation grid, so the quadrature is spectrally
accurate for smooth data.

On top of it sit the scalar second-order solver ``T``, the fast-variable
solver ``D(lambda, alpha)``, the slow-variable fixed point ``C`` with its
period mismatch ``Delta(lambda, alpha)``, a root finder for the branch
``lambda(alpha)`` that never uses the expansion coefficients, and the
center-stable variant used when the slow variable diffuses weakly.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import fourier
from .errors import (
    ConditioningWarning,
    ContractionError,
    DomainError,
    NotHyperbolicError,
    RootFailureError,
    SplittingError,
)

log = logging.getLogger(__name__)

HYPERBOLICITY_TOL = 1e-8
NEAR_HYPERBOLIC = 1e-5
ALPHA_MAX = 0.5
R_DEFAULT = 10.0
RESONANCE_TOL = 1e-10


def _projections(a):
    """Stable and unstable spectral projections from an ordered Schur form."""
    n = a.shape[0]
    t, q, k = linalg.schur(a.astype(complex), output="complex", sort="lhp")
    if k in (0, n):
        ps = np.eye(n, dtype=complex) if k == n else np.zeros((n, n), complex)
        return ps, np.eye(n, dtype=complex) - ps
    y = linalg.solve_sylvester(t[:k, :k], -t[k:, k:], t[:k, k:])
    block = np.zeros((n, n), dtype=complex)
    block[:k, :k] = np.eye(k)
    block[:k, k:] = -y
    ps = q @ block @ q.conj().T
    return ps, np.eye(n, dtype=complex) - ps


@dataclass(frozen=True)
class HyperbolicSystem:
    """Constant matrix ``A`` without purely imaginary eigenvalues, on period ``T``."""

    a_matrix: np.ndarray
    period: float

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_matrix, dtype=complex))
        if a.shape[0] != a.shape[1]:
            raise ValueError("a_matrix must be square")
        if not self.period > 0:
            raise DomainError("period must be positive")
        ev = linalg.eigvals(a)
        gap = float(np.min(np.abs(ev.real)))
        if gap < HYPERBOLICITY_TOL:
            raise NotHyperbolicError(f"eigenvalue with |Re| = {gap:.3e} below tolerance")
        if gap < NEAR_HYPERBOLIC:
            warnings.warn(f"nearly non-hyperbolic matrix (min |Re| = {gap:.3e})",
                          ConditioningWarning, stacklevel=3)
        object.__setattr__(self, "a_matrix", a)

    @property
    def n(self):
        return self.a_matrix.shape[0]

    @property
    def eigenvalues(self):
        return linalg.eigvals(self.a_matrix)

    def projections(self):
        return _projections(self.a_matrix)


def _modes(samples, period):
    """Fourier coefficients along axis 0 with the Nyquist mode split in two."""
    n = samples.shape[0]
    c = np.fft.fft(samples, axis=0) / n
    k = fourier.wavenumbers(n, period)
    if n % 2 == 0:
        k = np.concatenate([k, [-k[n // 2]]])
        c = np.concatenate([c, c[n // 2: n // 2 + 1] / 2], axis=0)
        c[n // 2] /= 2
    return k, c


def _expm_batch(mats):
    return linalg.expm(mats)


def solve_periodic_linear(system, g_samples):
    """Periodic solution ``U = S G`` of ``U' = A U + G`` on the grid.

    ``g_samples`` has shape ``(N, n)`` or ``(N, n, m)`` (``m`` right-hand
    sides); the result has the same shape.
    """
    a = system.a_matrix
    n = system.n
    period = system.period
    g = np.asarray(g_samples, dtype=complex)
    squeeze = g.ndim == 2
    if squeeze:
        g = g[:, :, None]
    if g.shape[1] != n:
        raise ValueError(f"samples must have {n} components")
    npts = g.shape[0]
    x = fourier.grid(npts, period)
    eye = np.eye(n, dtype=complex)
    ps, pu = system.projections()
    k, c = _modes(g, period)
    res = np.linalg.inv(1j * k[:, None, None] * eye - a)
    a_s = (res @ ps) @ c
    a_u = (res @ pu) @ c
    phase = np.exp(1j * np.outer(x, k))
    osc_s = np.einsum("jk,kab->jab", phase, a_s)
    osc_u = np.einsum("jk,kab->jab", phase, a_u)
    sum_s = a_s.sum(axis=0)
    sum_u = a_u.sum(axis=0)
    aps = a @ ps
    apu = a @ pu
    e_s = _expm_batch(x[:, None, None] * aps) - pu          # e^{Ax} P^s
    e_u = _expm_batch((x - period)[:, None, None] * apu) - ps  # e^{A(x-T)} P^u
    e_s_end = linalg.expm(period * aps) - pu                # e^{AT} P^s
    e_u_end = linalg.expm(-period * apu) - ps               # e^{-AT} P^u
    # int_0^T e^{A(T-s)} P^s G ds and int_T^0 e^{-As} P^u G ds
    int_s = (eye - e_s_end) @ sum_s
    int_u = (eye - e_u_end) @ sum_u
    term1 = e_s @ np.linalg.solve(eye - e_s_end, int_s)
    term2 = osc_s - e_s @ sum_s
    term3 = e_u @ np.linalg.solve(eye - e_u_end, int_u)
    term4 = osc_u - e_u @ sum_u
    out = term1 + term2 + term3 + term4
    return out[:, :, 0] if squeeze else out


def periodic_residual(system, u_samples, g_samples):
    """Max-norm of ``U' - A U - G`` with spectral differentiation."""
    u = np.asarray(u_samples, dtype=complex)
    du = fourier.diff(u.T, system.period).T
    r = du - np.einsum("ij,kj...->ki...", system.a_matrix, u) - g_samples
    return float(np.max(np.abs(r)))


def companion(a21, a22):
    return np.array([[0.0, 1.0], [a21, a22]], dtype=complex)


def second_order_bound(a21, a22, period):
    """Operator-norm bound on ``T: X^0 -> X^0`` for ``u'' = a21 u + a22 u' + g``."""
    a = companion(a21, a22)
    ev = linalg.eigvals(a)
    ps, pu = _projections(a)
    nu_s = ev[np.argmin(ev.real)]
    nu_u = ev[np.argmax(ev.real)]
    m = min(abs(nu_s.real), abs(nu_u.real))
    pre = 2.0 / (1.0 - np.exp(-m * period))
    return float(pre * (abs(ps[0, 1]) / abs(nu_s.real) + abs(pu[0, 1]) / abs(nu_u.real)))


def solve_second_order(a21, a22, g_samples, period):
    """Periodic solution of ``u'' = a21 u + a22 u' + g`` and its norm bound.

    Returns ``(u, bound)``; ``g_samples`` may carry extra trailing columns.
    """
    a = companion(a21, a22)
    ev = linalg.eigvals(a)
    if not (ev.real.min() < 0 < ev.real.max()):
        raise NotHyperbolicError(f"eigenvalues {ev} do not split across the imaginary axis")
    system = HyperbolicSystem(a, period)
    g = np.asarray(g_samples, dtype=complex)
    rhs = np.zeros((g.shape[0], 2) + g.shape[1:], dtype=complex)
    rhs[:, 1] = g
    u = solve_periodic_linear(system, rhs)[:, 0]
    return u, second_order_bound(a21, a22, period)


def talpha_coefficients(alpha, omega):
    return 1.0 / alpha**2, -2j / alpha - omega


def talpha_eigenvalues(alpha, omega):
    """Roots of ``nu^2 + (2i/alpha + omega) nu - 1/alpha^2`` ordered (stable, unstable)."""
    a21, a22 = talpha_coefficients(alpha, omega)
    ev = linalg.eigvals(companion(a21, a22))
    return ev[np.argsort(ev.real)]


def solve_talpha(alpha, omega, g_samples, period):
    """Periodic solution ``T(alpha) g`` of ``u'' = -(2i/alpha + omega) u' + u/alpha^2 + g``."""
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    a21, a22 = talpha_coefficients(alpha, omega)
    return solve_second_order(a21, a22, g_samples, period)[0]


def talpha_matrix(alpha, omega, n, period):
    """Grid matrix of ``T(alpha)``."""
    return solve_talpha(alpha, omega, np.eye(n, dtype=complex), period)


@dataclass(frozen=True)
class ScalarPeriodicProblem:
    """``(lambda, alpha)`` together with the periodic coefficients."""

    lam: complex
    alpha: float
    coeffs: object
    alpha_max: float = ALPHA_MAX
    radius: float = R_DEFAULT

    def __post_init__(self):
        if self.alpha == 0 or abs(self.alpha) > self.alpha_max:
            raise DomainError(f"alpha must satisfy 0 < |alpha| <= {self.alpha_max}")
        lam = complex(self.lam)
        if not (abs(lam.real) < self.radius and abs(lam.imag) <= 0.5):
            raise DomainError(f"lambda = {lam} outside the rectangle |Re| < {self.radius}, |Im| <= 1/2")
        object.__setattr__(self, "lam", lam)


def _d_operator(problem, tmat=None):
    c = problem.coeffs
    if tmat is None:
        tmat = talpha_matrix(problem.alpha, c.omega, c.n, c.period)
    m = tmat * (problem.lam - c.f1)[None, :]
    norm = np.max(np.sum(np.abs(m), axis=1))
    if norm >= 1.0:
        raise ContractionError(
            f"||T(alpha) B1(lambda)|| = {norm:.3g} >= 1 at alpha={problem.alpha}; reduce alpha"
        )
    return np.linalg.solve(np.eye(c.n) - m, tmat * (-c.f2)[None, :])


def solve_D(problem, v_samples, tmat=None):
    """``u = D(lambda, alpha) v`` solving ``u = T(alpha) (B1 u + B2 v)``.

    ``B1 = lambda - f1`` and ``B2 = -f2`` act by multiplication. The fixed
    point is solved directly on the grid after checking that
    ``T(alpha) B1`` is a contraction in the max-norm.
    """
    return _d_operator(problem, tmat) @ np.asarray(v_samples, dtype=complex)


def exp_convolution_matrix(mu, n, period):
    """Matrix of ``phi -> int_0^x e^{mu (x - y)} phi(y) dy`` at the grid and ``x = period``.

    Exact for the trigonometric interpolant of ``phi``; returns ``(n + 1, n)``.
    """
    x = np.append(fourier.grid(n, period), period)
    k, c = _modes(np.eye(n, dtype=complex), period)
    z = 1j * k - mu
    ek = np.exp(1j * np.outer(x, k))
    emu = np.exp(mu * x)[:, None]
    safe = np.abs(z) > RESONANCE_TOL
    w = np.where(safe, (ek - emu) / np.where(safe, z, 1.0), x[:, None] * emu)
    return w @ c


def _slow_factors(coeffs, lam):
    """Split of the slow-variable integrating factor into ``e^{mu x}`` and a periodic part."""
    gbar = float(np.mean(coeffs.g2))
    mu = (lam - gbar) / coeffs.omega
    g2_fluct = fourier.cumulative_integral(coeffs.g2 - gbar, coeffs.period)
    per = np.exp(-np.append(g2_fluct, g2_fluct[0]) / coeffs.omega)
    return mu, per


def solve_C_and_delta(problem, tmat=None):
    """Slow-variable solution ``v = C(lambda, alpha)`` with ``v(0) = 1`` and the mismatch.

    Solves ``omega v' = (lambda - g2) v - g1 D(lambda, alpha) v`` from ``x = 0``
    without imposing periodicity and returns ``(v, Delta)`` where ``v`` holds
    the grid values plus ``v(period)`` and ``Delta = v(period) - v(0)``.
    """
    c = problem.coeffs
    n = c.n
    mu, per = _slow_factors(c, problem.lam)
    dmat = _d_operator(problem, tmat)
    kmat = exp_convolution_matrix(mu, n, c.period)
    x = np.append(fourier.grid(n, c.period), c.period)
    base = np.exp(mu * x) * per
    # Q = (per(x)/omega) K diag(g1 / per) D
    q = (per[:, None] / c.omega) * (kmat @ ((c.g1 / per[:n])[:, None] * dmat))
    qn = q[:n]
    norm = np.max(np.sum(np.abs(qn), axis=1))
    if norm >= 1.0:
        raise ContractionError(f"||Q|| = {norm:.3g} >= 1 at alpha={problem.alpha}; reduce alpha")
    v = np.linalg.solve(np.eye(n) + qn, base[:n])
    v_end = base[n] - q[n] @ v
    full = np.append(v, v_end)
    return full, complex(v_end - v[0])


def delta_function(coeffs, alpha, alpha_max=ALPHA_MAX, radius=R_DEFAULT):
    """``lambda -> Delta(lambda, alpha)`` with ``T(alpha)`` assembled once."""
    tmat = talpha_matrix(alpha, coeffs.omega, coeffs.n, coeffs.period)

    def delta(lam):
        prob = ScalarPeriodicProblem(lam, alpha, coeffs, alpha_max, radius)
        return solve_C_and_delta(prob, tmat)[1]

    return delta


def find_lambda_root(coeffs, alpha, seed=None, tol=1e-10, max_iter=50,
                     alpha_max=ALPHA_MAX, radius=R_DEFAULT):
    """Root of ``Delta(., alpha)``: the branch point ``lambda(alpha)`` near ``gbar``.

    Newton iteration with a central-difference derivative, switching to a
    secant step when the derivative is below ``1e-12``. The default seed is
    ``gbar``, so the expansion coefficients are never consulted.
    """
    delta = delta_function(coeffs, alpha, alpha_max, radius)
    lam = complex(np.mean(coeffs.g2) if seed is None else seed)
    f = delta(lam)
    prev = None
    for it in range(max_iter):
        if abs(f) < tol:
            return lam
        h = 1e-6 * (1.0 + abs(lam))
        deriv = (delta(lam + h) - delta(lam - h)) / (2 * h)
        if abs(deriv) < 1e-12:
            if prev is None or prev[1] == f:
                raise RootFailureError(f"flat mismatch function at lambda={lam}")
            deriv = (f - prev[1]) / (lam - prev[0])
        prev = (lam, f)
        lam = lam - f / deriv
        f = delta(lam)
        log.debug("root it=%d lambda=%s |Delta|=%.3e", it, lam, abs(f))
    if abs(f) < tol:
        return lam
    raise RootFailureError(f"no root of Delta within {max_iter} iterations (|Delta|={abs(f):.3e})")


@dataclass(frozen=True)
class CenterStableSplit:
    eta_c: complex
    eta_s: complex
    r: float


def center_stable_split(b21, b22):
    """Eigenvalues of ``[[0, 1], [b21, b22]]`` as (center, stable) with the gap ``r``."""
    ev = linalg.eigvals(companion(b21, b22))
    ev = ev[np.argsort(ev.real)]
    eta_s, eta_c = ev[0], ev[1]
    r = abs(eta_c.real)
    if not eta_s.real < -2.0 * r or eta_s.real >= 0:
        raise SplittingError(
            f"no center/stable splitting: Re eta_s = {eta_s.real:.4g}, |Re eta_c| = {r:.4g}"
        )
    return CenterStableSplit(complex(eta_c), complex(eta_s), float(r))


def solve_center_stable(b21, b22, h_samples, period, a_c=0.0):
    """Center-stable solution of ``v'' = b21 v + b22 v' + h`` on ``[0, period]``.

    The stable part is made periodic, the center part is integrated from
    ``x = 0`` with amplitude ``a_c`` along the center eigenvector
    ``(1, eta_c)``. Returns ``(v, solvability)`` where ``v`` holds the grid
    values plus ``v(period)`` and ``solvability`` is the center component of
    ``V(period) - V(0)``; the solution is periodic iff it vanishes.
    """
    split = center_stable_split(b21, b22)
    b = companion(b21, b22)
    eye = np.eye(2)
    pc = (b - split.eta_s * eye) / (split.eta_c - split.eta_s)
    ps = (b - split.eta_c * eye) / (split.eta_s - split.eta_c)
    h = np.asarray(h_samples, dtype=complex)
    n = len(h)
    x = np.append(fourier.grid(n, period), period)
    w_c = exp_convolution_matrix(split.eta_c, n, period) @ h
    w_s = exp_convolution_matrix(split.eta_s, n, period) @ h
    stable = np.exp(split.eta_s * x) / (1.0 - np.exp(split.eta_s * period)) * w_s[-1] + w_s
    jh_first = pc[0, 1] * w_c + ps[0, 1] * stable
    v = np.exp(split.eta_c * x) * a_c + jh_first
    solvability = (np.exp(split.eta_c * period) - 1.0) * a_c + pc[0, 1] * w_c[-1]
    return v, complex(solvability)


def center_amplitude(b21, b22, h_samples, period):
    """Amplitude ``a_c`` that makes :func:`solve_center_stable` periodic."""
    split = center_stable_split(b21, b22)
    factor = np.exp(split.eta_c * period) - 1.0
    if abs(factor) < RESONANCE_TOL:
        raise SplittingError("center eigenvalue is resonant with the period")
    _, s0 = solve_center_stable(b21, b22, h_samples, period, 0.0)
    return -s0 / factor
