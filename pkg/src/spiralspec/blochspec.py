"""Bloch operators and essential-spectrum curves of wave trains and spirals.

For a spatial Floquet exponent ``nu = i gamma`` the essential spectrum is the
spectrum of the periodic-coefficient operator

    L(gamma) V = diag(1, delta) (d/dx + i gamma)^2 V + omega V_x + J(x) V

(the spiral form: only the diffusion carries ``i gamma``). The wave-train form
replaces the drift by ``omega (d/dx + i gamma)`` so that
``lambda_wavetrain(gamma) = lambda_spiral(gamma) + i omega gamma``.
Operators are discretised on ``N`` Fourier modes; mode ``m`` has wavenumber
``kappa m`` with ``m = -N/2, ..., N/2 - 1``.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigs

from . import fourier
from .errors import AmbiguityError, NumericalError
from .kinetics import sample_coefficients

log = logging.getLogger(__name__)

FRAMES = ("spiral", "wavetrain")
MAX_REFINE = 10


@dataclass(frozen=True)
class SpectralCurve:
    """A traced branch ``lam(gamma)`` of essential spectrum.

    ``gamma`` is in the normalised length units of the coefficients; multiply
    by ``1 / length_scale`` for the original variables.
    """

    gamma: np.ndarray
    lam: np.ndarray
    ell: int = 0
    frame: str = "spiral"
    delta: float = 0.0
    omega: float = float("nan")
    length_scale: float = 1.0
    orientation: str = "increasing_gamma"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        lam = np.asarray(self.lam, dtype=complex)
        if g.shape != lam.shape or g.ndim != 1:
            raise ValueError("gamma and lambda must be 1-D arrays of equal length")
        if len(g) > 1:
            d = np.diff(g)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("gamma must be strictly monotone")
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "lam", lam)

    def __len__(self):
        return len(self.gamma)


def _symbols(coeffs, gamma, frame):
    k = fourier.wavenumbers(coeffs.n, coeffs.period)
    second = -((k + gamma) ** 2)
    drift = 1j * coeffs.omega * (k + gamma if frame == "wavetrain" else k)
    return second, drift


def build_bloch_matrix(coeffs, gamma, frame="spiral"):
    """Collocation matrix of ``L(gamma)`` acting on ``(u, v)`` grid samples.

    Differential parts are exact Fourier multipliers (one-sided at the Nyquist
    mode), so constant coefficients reproduce the closed-form dispersion
    relation mode by mode.
    """
    if frame not in FRAMES:
        raise ValueError(f"unknown frame {frame!r}")
    n = coeffs.n
    second, drift = _symbols(coeffs, gamma, frame)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, :n] = fourier.symbol_matrix(second + drift)
    m[n:, n:] = fourier.symbol_matrix(coeffs.delta * second + drift)
    idx = np.arange(n)
    m[idx, idx] += coeffs.f1
    m[idx, n + idx] = coeffs.f2
    m[n + idx, idx] = coeffs.g1
    m[n + idx, n + idx] += coeffs.g2
    return m


def _sorted(ev):
    return ev[np.lexsort((-ev.imag, -ev.real))]


def eigenvalues_at(coeffs, gamma, frame="spiral"):
    """All ``2N`` eigenvalues at ``gamma``, sorted by real part (descending)."""
    mat = build_bloch_matrix(coeffs, gamma, frame)
    try:
        ev = linalg.eigvals(mat, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(mat) if np.all(np.isfinite(mat)) else np.inf
        raise NumericalError(f"eigensolver failed at gamma={gamma} (cond={cond:.3e}): {exc}")
    return _sorted(ev)


def eigenvalues_near(coeffs, gamma, sigma, k=6, frame="spiral"):
    """The ``k`` eigenvalues closest to ``sigma`` (shift-invert Arnoldi).

    Falls back to the dense solver when Arnoldi does not converge.
    """
    mat = build_bloch_matrix(coeffs, gamma, frame)
    try:
        ev = eigs(mat, k=k, sigma=sigma, return_eigenvectors=False, tol=1e-13)
    except (ArpackNoConvergence, ArpackError, RuntimeError):
        ev = linalg.eigvals(mat)
    return ev[np.argsort(np.abs(ev - sigma))][:k]


def trace_branch(coeffs, lambda_start, gamma_range, dgamma=None, frame="spiral",
                 jump_tol=None, tie_tol=None, match_tol=None, method="dense"):
    """Follow one eigenvalue branch across ``gamma_range``.

    Each step predicts ``lambda`` by linear extrapolation and picks the nearest
    eigenvalue. A step whose selected value sits farther than ``jump_tol``
    from the previous point, or whose two nearest candidates are within
    ``tie_tol`` of each other, is halved (up to 10 times) before an
    :class:`AmbiguityError` is raised. ``method="local"`` uses shift-invert
    Arnoldi around the predictor instead of the full dense spectrum.
    """
    lo, hi = map(float, gamma_range)
    if dgamma is None:
        dgamma = coeffs.kappa / 50.0
    h0 = abs(float(dgamma)) * np.sign(hi - lo) if hi != lo else 0.0

    def spectrum(gamma, sigma):
        if method == "local":
            return eigenvalues_near(coeffs, gamma, sigma, frame=frame)
        return eigenvalues_at(coeffs, gamma, frame)

    def jump_limit(lam):
        return jump_tol if jump_tol is not None else 0.1 * (1.0 + abs(lam))

    ev = spectrum(lo, lambda_start)
    d = np.abs(ev - lambda_start)
    j = int(np.argmin(d))
    limit = match_tol if match_tol is not None else 0.1 * (1.0 + abs(lambda_start))
    if d[j] > limit:
        raise AmbiguityError(
            f"no eigenvalue within {limit:.3g} of the start value {lambda_start} at gamma={lo}"
        )
    gammas = [lo]
    lams = [complex(ev[j])]
    gamma = lo
    while h0 != 0 and (hi - gamma) * np.sign(h0) > 1e-12 * max(1.0, abs(hi)):
        h = h0
        for refine in range(MAX_REFINE + 1):
            g_new = gamma + h
            if (g_new - hi) * np.sign(h0) > 0:
                g_new, h = hi, hi - gamma
            if len(lams) >= 2:
                slope = (lams[-1] - lams[-2]) / (gammas[-1] - gammas[-2])
                pred = lams[-1] + slope * h
            else:
                pred = lams[-1]
            ev = spectrum(g_new, pred)
            dist = np.abs(ev - pred)
            order = np.argsort(dist)
            best = complex(ev[order[0]])
            scale = jump_limit(lams[-1])
            tie = tie_tol if tie_tol is not None else 1e-3 * scale
            tied = len(order) > 1 and dist[order[1]] - dist[order[0]] < tie
            jumped = abs(best - lams[-1]) > scale
            if not (tied or jumped):
                break
            h *= 0.5
        else:
            kind = "tie" if tied else "jump"
            raise AmbiguityError(
                f"branch selection ambiguous ({kind}) near gamma={gamma:.6g}, lambda={lams[-1]:.6g}; "
                "refine dgamma"
            )
        gamma = g_new
        gammas.append(gamma)
        lams.append(best)
    return SpectralCurve(np.array(gammas), np.array(lams), ell=0, frame=frame,
                         delta=coeffs.delta, omega=coeffs.omega,
                         length_scale=coeffs.length_scale)


def to_spiral_frame(curve, omega0, ell):
    """Vertical copy ``lambda + i omega0 ell`` of a spiral-form curve.

    A wave-train-frame curve is first mapped back with
    ``lambda_spiral = lambda_wavetrain - i omega gamma``.
    """
    lam = curve.lam
    if curve.frame == "wavetrain":
        lam = lam - 1j * curve.omega * curve.gamma
    shifted = lam + 1j * float(omega0) * (int(ell) - (curve.ell if curve.frame == "spiral" else 0))
    return replace(curve, lam=shifted, ell=int(ell), frame="spiral")


def wavetrain_frame_curve(coeffs, gamma_range, dgamma=None, lambda_start=None, **kwargs):
    """Trace the wave-train-form branch, by default the one starting at ``lambda = 0``."""
    lo = float(gamma_range[0])
    if lambda_start is None:
        lambda_start = 1j * coeffs.omega * lo
    return trace_branch(coeffs, lambda_start, gamma_range, dgamma, frame="wavetrain", **kwargs)


def nearest_eigenvalue(coeffs, gamma, target, frame="spiral"):
    ev = eigenvalues_at(coeffs, gamma, frame)
    return complex(ev[np.argmin(np.abs(ev - target))])


def delta_sweep(model, family, gamma_range, dgamma=None, **kwargs):
    """Trace the branch through the ``gbar`` region for every member of a family.

    The start value is the eigenvalue nearest ``gbar`` at ``gamma_range[0]``.
    """
    curves = []
    for wt in family:
        coeffs = sample_coefficients(model.with_delta(wt.delta), wt)
        start = nearest_eigenvalue(coeffs, gamma_range[0], coeffs.gbar)
        curve = trace_branch(coeffs, start, gamma_range, dgamma, **kwargs)
        curves.append(replace(curve, delta=float(wt.delta), meta={"kappa": wt.kappa}))
    return curves


def set_distance(a, b):
    """Largest distance from a point of ``a`` to its nearest point in ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.min(np.abs(a[:, None] - b[None, :]), axis=1)))
