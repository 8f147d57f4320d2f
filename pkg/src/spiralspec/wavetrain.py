"""Periodic wave trains of the comoving reaction-diffusion system.

A wave train with wavenumber ``kappa`` is a ``2 pi / kappa``-periodic solution of

    D U'' + omega U' + F(U) = 0,      D = diag(d_u, delta),

and ``omega`` is the speed in the frame where the profile is stationary. The
profile is discretised by Fourier collocation and ``(u, v, omega)`` are found
by damped Newton iteration closed by an integral phase condition.
"""

import csv
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft, linalg, optimize

from . import fourier
from .errors import (
    ContinuationStalledError,
    DegenerateSolutionError,
    InvalidWaveTrainError,
    NoConvergenceError,
    SimulationFailureError,
)
from .kinetics import evaluate_jacobian, evaluate_kinetics

log = logging.getLogger(__name__)

TOL_NEWTON = 1e-10
MAX_ITER = 25
MAX_HALVINGS = 8
STEP_TOL = 1e-11
ROUNDOFF_TOL = 1e-7


@dataclass(frozen=True)
class Profile:
    """Samples of ``(u, v)`` on one period; ``omega`` is optional."""

    u: np.ndarray
    v: np.ndarray
    kappa: float
    omega: float = float("nan")

    @property
    def n(self):
        return len(self.u)

    @property
    def period(self):
        return 2.0 * np.pi / self.kappa

    @property
    def x(self):
        return fourier.grid(self.n, self.period)


@dataclass(frozen=True)
class WaveTrain(Profile):
    delta: float = 0.0
    residual_norm: float = 0.0


def _split(profile):
    if isinstance(profile, Profile):
        return np.asarray(profile.u, float), np.asarray(profile.v, float)
    u, v = profile
    return np.asarray(u, float), np.asarray(v, float)


def _rhs(model, u, v, omega, kappa):
    period = 2.0 * np.pi / kappa
    f, g = evaluate_kinetics(model, u, v)
    ru = model.d_u * fourier.diff(u, period, 2) + omega * fourier.diff(u, period, 1) + f
    rv = omega * fourier.diff(v, period, 1) + g
    if model.delta:
        rv = rv + model.delta * fourier.diff(v, period, 2)
    return ru, rv


def residual(model, profile, omega, kappa):
    """Max-norm of ``D U'' + omega U' + F(U)`` on the collocation grid."""
    u, v = _split(profile)
    if u.shape != v.shape or len(u) % 2:
        raise InvalidWaveTrainError("profile arrays must have the same even length")
    ru, rv = _rhs(model, u, v, omega, kappa)
    return float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))


def phase_condition(reference, u, v):
    """Integral phase condition ``<U_ref', U - U_ref>`` (trapezoidal)."""
    ur, vr = _split(reference)
    period = 2.0 * np.pi / reference.kappa
    du = fourier.diff(ur, period)
    dv = fourier.diff(vr, period)
    h = period / len(ur)
    return float(h * (du @ (u - ur) + dv @ (v - vr)))


def estimate_omega(model, profile, kappa):
    """Least-squares speed for a trial profile (the residual is affine in omega)."""
    u, v = _split(profile)
    period = 2.0 * np.pi / kappa
    ru, rv = _rhs(model, u, v, 0.0, kappa)
    du = fourier.diff(u, period)
    dv = fourier.diff(v, period)
    denom = du @ du + dv @ dv
    if denom == 0:
        raise DegenerateSolutionError("constant profile has no phase or speed")
    return float(-(du @ ru + dv @ rv) / denom)


def _newton(model, kappa, u, v, omega, reference, tol, max_iter):
    n = len(u)
    period = 2.0 * np.pi / kappa
    d1 = fourier.diff_matrix(n, period, 1)
    d2 = fourier.diff_matrix(n, period, 2)
    h = period / n
    ref_u, ref_v = _split(reference)
    pu = h * (d1 @ ref_u)
    pv = h * (d1 @ ref_v)
    if not np.any(pu) and not np.any(pv):
        raise DegenerateSolutionError("seed is constant: phase condition row vanishes")

    def full_residual(u, v, omega):
        ru, rv = _rhs(model, u, v, omega, kappa)
        ph = pu @ (u - ref_u) + pv @ (v - ref_v)
        return np.concatenate([ru, rv, [ph]])

    res = full_residual(u, v, omega)
    norm = np.max(np.abs(res))
    for it in range(max_iter):
        if norm < tol:
            break
        (fu, fv), (gu, gv) = evaluate_jacobian(model, u, v)
        jac = np.zeros((2 * n + 1, 2 * n + 1))
        jac[:n, :n] = model.d_u * d2 + omega * d1 + np.diag(fu)
        jac[:n, n:2 * n] = np.diag(fv)
        jac[n:2 * n, :n] = np.diag(gu)
        jac[n:2 * n, n:2 * n] = model.delta * d2 + omega * d1 + np.diag(gv)
        jac[:n, -1] = d1 @ u
        jac[n:2 * n, -1] = d1 @ v
        jac[-1, :n] = pu
        jac[-1, n:2 * n] = pv
        try:
            step = linalg.solve(jac, -res, check_finite=True)
        except (linalg.LinAlgError, ValueError) as exc:
            raise NoConvergenceError(f"singular Newton matrix: {exc}", norm) from exc
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial_u = u + t * step[:n]
            trial_v = v + t * step[n:2 * n]
            trial_w = omega + t * step[-1]
            trial = full_residual(trial_u, trial_v, trial_w)
            trial_norm = np.max(np.abs(trial))
            if np.isfinite(trial_norm) and trial_norm < norm:
                break
            t *= 0.5
        if not np.isfinite(trial_norm):
            raise NoConvergenceError("Newton iterate became non-finite", norm)
        u, v, omega, res, norm = trial_u, trial_v, trial_w, trial, trial_norm
        log.debug("newton it=%d |F|=%.3e step=%.3g omega=%.10g", it, norm, t, omega)
        # stiff kinetics on fine grids put the rounding floor of the residual near
        # tol; a full step at the level of rounding means the iterate is converged
        scale = max(np.max(np.abs(u)), np.max(np.abs(v)), abs(omega), 1.0)
        if t == 1.0 and np.max(np.abs(step)) < STEP_TOL * scale and norm < ROUNDOFF_TOL:
            break
    if not (norm < tol or (np.max(np.abs(step)) < STEP_TOL * scale and norm < ROUNDOFF_TOL)):
        raise NoConvergenceError(f"Newton did not converge in {max_iter} iterations", norm)
    return u, v, omega, norm


def _reflect(a):
    return np.roll(a[::-1], 1)


def solve(model, kappa, seed, omega=None, tol=TOL_NEWTON, max_iter=MAX_ITER):
    """Newton solve for the wave train with wavenumber ``kappa``.

    ``seed`` is a :class:`Profile`/:class:`WaveTrain` or a ``(u, v)`` pair whose
    length sets the grid. The speed is initialised from ``omega``, the seed's
    own ``omega``, or a least-squares estimate, in that order. Solutions are
    returned with ``omega > 0`` (the profile is mirrored if needed).
    """
    u, v = _split(seed)
    n = len(u)
    if n % 2 or v.shape != u.shape:
        raise InvalidWaveTrainError("seed arrays must have the same even length")
    reference = Profile(u.copy(), v.copy(), kappa)
    if np.ptp(u) == 0 and np.ptp(v) == 0:
        raise DegenerateSolutionError("seed is constant: phase condition row vanishes")
    if omega is None:
        omega = getattr(seed, "omega", float("nan"))
        if not np.isfinite(omega):
            omega = estimate_omega(model, (u, v), kappa)
    u, v, omega, norm = _newton(model, kappa, u, v, float(omega), reference, tol, max_iter)
    if np.ptp(u) < 1e-8 and np.ptp(v) < 1e-8:
        raise DegenerateSolutionError("Newton collapsed onto a spatially constant state")
    if omega < 0:
        u, v, omega = _reflect(u), _reflect(v), -omega
    return WaveTrain(u=u, v=v, kappa=float(kappa), omega=float(omega),
                     delta=float(model.delta), residual_norm=float(norm))


def rest_state(model, guess=(0.0, 0.0)):
    """Spatially homogeneous equilibrium near ``guess``."""
    sol = optimize.root(lambda z: evaluate_kinetics(model, z[0], z[1]), guess, tol=1e-14)
    return float(sol.x[0]), float(sol.x[1])


def _excited_amplitude(model, v_rest):
    us = np.linspace(0.0, 10.0, 2001)
    f, _ = evaluate_kinetics(model, us, np.full_like(us, v_rest))
    crossings = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]
    return float(us[crossings[-1]]) if len(crossings) else 1.0


def simulate_seed(model, kappa, n=256, t_end=50.0, dt=None, amplitude=None):
    """Time-step a right-moving pulse on one period and return the last frame.

    Diffusion is treated implicitly in Fourier space and the kinetics
    explicitly (IMEX Euler) with a fixed step capped by the kinetics'
    stiffness. The result is shifted so ``max(u)`` sits at ``x = 0``. It is
    only meant as a Newton seed.
    """
    if n % 2:
        raise InvalidWaveTrainError("grid size must be even")
    period = 2.0 * np.pi / kappa
    x = fourier.grid(n, period)
    ur, vr = rest_state(model)
    if amplitude is None:
        amplitude = _excited_amplitude(model, vr)
    v_high = optimize.brentq(
        lambda s: evaluate_kinetics(model, amplitude, s)[1], vr - 1.0, vr + 10.0
    ) if evaluate_kinetics(model, amplitude, vr)[1] > 0 else vr
    u = np.full(n, ur)
    v = np.full(n, vr)
    front = (x > 0.10 * period) & (x < 0.20 * period)
    tail = (x > 0.0) & (x <= 0.10 * period)
    u[front] = amplitude
    v[tail] = v_high
    if dt is None:
        probe_u = np.linspace(min(ur, 0.0) - 0.1, amplitude + 0.1, 41)
        probe_v = np.linspace(min(vr, 0.0) - 0.1, max(v_high, vr) + 0.1, 41)
        pu, pv = np.meshgrid(probe_u, probe_v)
        jac = np.moveaxis(evaluate_jacobian(model, pu, pv), (0, 1), (-2, -1))
        stiffness = np.max(np.abs(np.linalg.eigvals(jac)))
        dt = min(0.01, 0.5 / stiffness)
    k2 = fourier.wavenumbers(n, period) ** 2
    lin_u = 1.0 / (1.0 + dt * model.d_u * k2)
    lin_v = 1.0 / (1.0 + dt * model.delta * k2)
    steps = int(np.ceil(t_end / dt)) if t_end > 0 else 0
    for _ in range(steps):
        f, g = evaluate_kinetics(model, u, v)
        u = fft.ifft(lin_u * fft.fft(u + dt * f)).real
        v = fft.ifft(lin_v * fft.fft(v + dt * g)).real
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise SimulationFailureError("simulation produced non-finite values")
    shift = int(np.argmax(u))
    return Profile(np.roll(u, -shift), np.roll(v, -shift), float(kappa))


def continue_in_delta(model, wavetrain, delta_targets, tol=TOL_NEWTON, max_iter=MAX_ITER,
                      delta_min_step=1e-6, max_step=None):
    """Secant-predictor / Newton-corrector continuation of a wave train in delta.

    Returns one converged :class:`WaveTrain` per target. Steps that fail to
    converge are halved; below ``delta_min_step`` the continuation stops.
    """
    current = wavetrain
    previous = None
    out = []
    for target in delta_targets:
        target = float(target)
        if target < 0:
            raise ContinuationStalledError(f"negative delta target {target}", current.delta)
        while True:
            step = target - current.delta
            if max_step is not None and abs(step) > max_step:
                step = np.sign(step) * max_step
            while True:
                d_new = current.delta + step
                if previous is not None and previous.delta != current.delta:
                    w = (d_new - current.delta) / (current.delta - previous.delta)
                    gu = current.u + w * (current.u - previous.u)
                    gv = current.v + w * (current.v - previous.v)
                    gw = current.omega + w * (current.omega - previous.omega)
                else:
                    gu, gv, gw = current.u, current.v, current.omega
                try:
                    sol = _newton(model.with_delta(d_new), current.kappa, gu.copy(), gv.copy(),
                                  gw, current, tol, max_iter)
                    break
                except NoConvergenceError:
                    step *= 0.5
                    if abs(step) < delta_min_step:
                        raise ContinuationStalledError(
                            f"continuation stalled below step {delta_min_step}", current.delta
                        ) from None
            u, v, omega, norm = sol
            new = WaveTrain(u=u, v=v, kappa=current.kappa, omega=omega, delta=d_new,
                            residual_norm=norm)
            if step != 0 or previous is None:
                previous = current if step != 0 else previous
            current = new
            if d_new == target:
                break
        out.append(current)
    return out


def resample(profile, n):
    """Trigonometric resampling of a profile onto ``n`` points."""
    if n == profile.n:
        return profile
    x = fourier.grid(n, profile.period)
    u = fourier.interpolant(profile.u, profile.period)(x)
    v = fourier.interpolant(profile.v, profile.period)(x)
    return replace(profile, u=u, v=v)


def continue_in_kappa(model, wavetrain, kappa_target, n=None, factor=1.05, max_dx=0.025,
                      tol=TOL_NEWTON, max_iter=MAX_ITER, min_factor=1.0005):
    """Natural continuation of a wave train in the wavenumber.

    Used to reach short-period wave trains that time stepping cannot select.
    The grid is refined to keep the spacing below ``max_dx`` and ends on
    ``n`` points (default: the input grid size).
    """
    n_final = wavetrain.n if n is None else int(n)
    current = wavetrain
    previous = None
    log_target = np.log(kappa_target)
    step = np.log(factor)
    while current.kappa != kappa_target:
        remaining = log_target - np.log(current.kappa)
        h = np.sign(remaining) * min(abs(remaining), step)
        kappa = float(np.exp(np.log(current.kappa) + h)) if abs(remaining) > step else float(kappa_target)
        n_step = n_final
        while 2.0 * np.pi / kappa / n_step > max_dx:
            n_step *= 2
        seed = resample(current, n_step)
        omega = current.omega
        if previous is not None and previous.n == current.n:
            w = h / (np.log(current.kappa) - np.log(previous.kappa))
            omega = current.omega + w * (current.omega - previous.omega)
        try:
            new = solve(model, kappa, seed, omega=omega, tol=tol, max_iter=max_iter)
        except NoConvergenceError:
            step *= 0.5
            if step < np.log(min_factor):
                raise ContinuationStalledError(
                    f"wavenumber continuation stalled at kappa={current.kappa}", current.delta
                ) from None
            continue
        previous, current = current, new
        log.info("kappa=%.6g omega=%.10g n=%d", kappa, new.omega, n_step)
    if current.n != n_final:
        current = solve(model, kappa_target, resample(current, n_final), omega=current.omega,
                        tol=tol, max_iter=max_iter)
    return current


def save_profile_csv(profile, path):
    """Write ``x, u, v`` columns with full double precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "u", "v"])
        for row in zip(profile.x, profile.u, profile.v):
            writer.writerow([repr(float(c)) for c in row])


def load_profile_csv(path, kappa=None):
    """Read an ``x, u, v`` CSV; ``kappa`` defaults to the one implied by the grid."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [(float(r["x"]), float(r["u"]), float(r["v"])) for r in reader]
    if len(rows) < 2:
        raise InvalidWaveTrainError(f"profile file {path} has fewer than two rows")
    x, u, v = map(np.array, zip(*rows))
    if kappa is None:
        period = (x[1] - x[0]) * len(x)
        kappa = 2.0 * np.pi / period
    return Profile(u, v, float(kappa))


def as_wavetrain(profile, omega, delta=0.0, residual_norm=0.0):
    return WaveTrain(u=profile.u, v=profile.v, kappa=profile.kappa, omega=omega,
                     delta=delta, residual_norm=residual_norm)


def rotate(wavetrain, shift):
    """Grid rotation of a wave train (translation symmetry)."""
    return replace(wavetrain, u=np.roll(wavetrain.u, shift), v=np.roll(wavetrain.v, shift))
