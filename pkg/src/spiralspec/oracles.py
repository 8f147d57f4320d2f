"""Independent checks of the periodic solution operators.

Every operator in :mod:`spiralspec.linops` is compared against a
multiple-shooting solution of its defining ODE (integrate on each grid
interval with DOP853, then impose continuity and periodicity as one linear
system) and against residual substitution with spectral derivatives. The
proved norm bounds and small-``alpha`` orders are checked empirically.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import fourier, linops
from .kinetics import PeriodicCoefficients

RESIDUAL_TOL = 1e-8
SHOOTING_TOL = 1e-7
SLOPE_MIN_T4 = 3.8
SLOPE_MIN_LINEAR = 1.0
ALPHAS = np.geomspace(0.02, 0.2, 8)


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    threshold: float
    kind: str  # "max" (value must stay below threshold) or "min"

    @property
    def passed(self):
        if not np.isfinite(self.value):
            return False
        return self.value < self.threshold if self.kind == "max" else self.value >= self.threshold

    def as_dict(self):
        d = asdict(self)
        d["passed"] = bool(self.passed)
        return d


def manufactured_coefficients(n=128):
    """``f1 = 0.2 cos x, f2 = cos x, g1 = 1 + sin x, g2 = -1`` with ``omega = 2, kappa = 1``."""
    return PeriodicCoefficients.from_functions(
        lambda x: 0.2 * np.cos(x), np.cos, lambda x: 1.0 + np.sin(x), -1.0,
        kappa=1.0, omega=2.0, n=n,
    )


def shooting_periodic(a_of_x, g_of_x, period, n, rtol=1e-12, atol=1e-13):
    """Periodic solution of ``U' = A(x) U + G(x)`` at ``n`` grid points.

    ``a_of_x`` and ``g_of_x`` map an array of ``x`` to stacks ``(k, d, d)`` and
    ``(k, d)``. All grid intervals are integrated together as one IVP in the
    local variable, then the continuity and periodicity conditions are
    solved as a block-cyclic linear system.
    """
    x0 = fourier.grid(n, period)
    h = period / n
    d = a_of_x(x0[:1]).shape[-1]

    def rhs(s, y):
        y = y.reshape(n, d, d + 1)
        x = x0 + s
        a = a_of_x(x)
        out = a @ y
        out[:, :, d] += g_of_x(x)
        return out.ravel()

    y0 = np.zeros((n, d, d + 1), dtype=complex)
    y0[:, :, :d] = np.eye(d)
    sol = solve_ivp(rhs, (0.0, h), y0.ravel(), method="DOP853", rtol=rtol, atol=atol)
    yend = sol.y[:, -1].reshape(n, d, d + 1)
    phi, p = yend[:, :, :d], yend[:, :, d]
    big = np.eye(n * d, dtype=complex)
    rhs_vec = np.zeros(n * d, dtype=complex)
    for j in range(n):
        nxt = (j + 1) % n
        big[nxt * d:(nxt + 1) * d, j * d:(j + 1) * d] -= phi[j]
        rhs_vec[nxt * d:(nxt + 1) * d] = p[j]
    return np.linalg.solve(big, rhs_vec).reshape(n, d)


def _interp(samples, period):
    f = fourier.interpolant(np.asarray(samples, dtype=complex), period)
    return lambda x: f(x)


def random_hyperbolic(rng, dim, gap=0.3, spread=2.0):
    """Random complex matrix with every eigenvalue at ``|Re| >= gap``."""
    re = rng.uniform(gap, gap + spread, dim) * rng.choice([-1.0, 1.0], dim)
    re[0], re[-1] = -abs(re[0]), abs(re[-1])
    ev = re + 1j * rng.uniform(-2.0, 2.0, dim)
    basis = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) + 2.0 * np.eye(dim)
    return basis @ np.diag(ev) @ np.linalg.inv(basis)


def random_smooth(rng, n, period, dim=None, modes=4):
    """Random trigonometric polynomial samples with ``modes`` harmonics."""
    x = fourier.grid(n, period)
    kappa = 2.0 * np.pi / period
    shape = (modes,) if dim is None else (modes, dim)
    c = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    c0 = rng.normal(size=shape[1:]) + 1j * rng.normal(size=shape[1:])
    k = np.arange(-(modes // 2), modes - modes // 2)
    waves = np.exp(1j * kappa * np.outer(x, k))
    return c0 + np.tensordot(waves, c, axes=(1, 0)) / modes


def _companion_system(a21, a22):
    a = linops.companion(a21, a22)
    return lambda x: np.broadcast_to(a, (len(x), 2, 2))


def _second_order_oracle(a21, a22, g, period):
    gi = _interp(g, period)

    def g_of_x(x):
        out = np.zeros((len(x), 2), dtype=complex)
        out[:, 1] = gi(x)
        return out

    return shooting_periodic(_companion_system(a21, a22), g_of_x, period, len(g))[:, 0]


def _second_order_residual(u, a21, a22, g, period):
    d1 = fourier.diff(u, period)
    d2 = fourier.diff(u, period, order=2)
    return float(np.max(np.abs(d2 - a21 * u - a22 * d1 - g)) / max(1.0, np.max(np.abs(g))))


def check_periodic_linear(rng, n_instances, n=32, dim=3):
    res, shoot = [], []
    for _ in range(n_instances):
        period = rng.uniform(1.0, 8.0)
        a = random_hyperbolic(rng, dim)
        g = random_smooth(rng, n, period, dim)
        system = linops.HyperbolicSystem(a, period)
        u = linops.solve_periodic_linear(system, g)
        res.append(linops.periodic_residual(system, u, g) / np.max(np.abs(g)))
        gi = _interp(g.T, period)
        ref = shooting_periodic(lambda x: np.broadcast_to(a, (len(x), dim, dim)),
                                lambda x: gi(x).T, period, n)
        shoot.append(np.max(np.abs(u - ref)) / np.max(np.abs(ref)))
    return [OracleCheck("S residual", max(res), RESIDUAL_TOL, "max"),
            OracleCheck("S shooting", max(shoot), SHOOTING_TOL, "max")]


def _random_split_pair(rng):
    nu_s = complex(-rng.uniform(0.3, 3.0), rng.uniform(-2, 2))
    nu_u = complex(rng.uniform(0.3, 3.0), rng.uniform(-2, 2))
    return -nu_s * nu_u, nu_s + nu_u


def check_second_order(rng, n_instances, n=32, n_bound=50):
    res, shoot, ratio = [], [], []
    for _ in range(n_instances):
        period = rng.uniform(1.0, 8.0)
        a21, a22 = _random_split_pair(rng)
        g = random_smooth(rng, n, period)
        u, _ = linops.solve_second_order(a21, a22, g, period)
        res.append(_second_order_residual(u, a21, a22, g, period))
        ref = _second_order_oracle(a21, a22, g, period)
        shoot.append(np.max(np.abs(u - ref)) / np.max(np.abs(ref)))
    # norm-bound conformance on many right-hand sides for a few operators
    for _ in range(max(1, n_instances // 4)):
        period = rng.uniform(1.0, 8.0)
        a21, a22 = _random_split_pair(rng)
        g = np.stack([random_smooth(rng, n, period) for _ in range(n_bound)], axis=1)
        u, bound = linops.solve_second_order(a21, a22, g, period)
        measured = np.max(np.abs(u), axis=0) / np.max(np.abs(g), axis=0)
        ratio.append(np.max(measured) / bound)
    return [OracleCheck("second-order residual", max(res), RESIDUAL_TOL, "max"),
            OracleCheck("second-order shooting", max(shoot), SHOOTING_TOL, "max"),
            OracleCheck("second-order norm / bound", max(ratio), 1.0 + 1e-12, "max")]


def check_talpha(rng, n_instances, n=64):
    res, shoot = [], []
    for _ in range(n_instances):
        period = 2.0 * np.pi / rng.uniform(0.5, 2.0)
        alpha = rng.uniform(0.1, 0.4)
        omega = rng.uniform(1.0, 3.0)
        g = random_smooth(rng, n, period)
        u = linops.solve_talpha(alpha, omega, g, period)
        a21, a22 = linops.talpha_coefficients(alpha, omega)
        res.append(_second_order_residual(u, a21, a22, g, period))
        ref = _second_order_oracle(a21, a22, g, period)
        shoot.append(np.max(np.abs(u - ref)) / np.max(np.abs(ref)))
    return [OracleCheck("T(alpha) residual", max(res), RESIDUAL_TOL, "max"),
            OracleCheck("T(alpha) shooting", max(shoot), SHOOTING_TOL, "max")]


def _slope(alphas, values):
    return float(np.polyfit(np.log(alphas), np.log(values), 1)[0])


def talpha_remainder_slope(omega=2.0, n=128, alphas=ALPHAS):
    """Order of ``||T(alpha) g + alpha^2 g + 2i alpha^3 g'||`` for a smooth ``g``."""
    period = 2.0 * np.pi
    x = fourier.grid(n, period)
    g = np.cos(x) + 0.5 * np.sin(2 * x)
    dg = fourier.diff(g, period)
    err = [np.max(np.abs(linops.solve_talpha(a, omega, g, period) + a**2 * g + 2j * a**3 * dg))
           for a in alphas]
    return _slope(alphas, err)


def talpha_eigenvalue_ratio(alpha, omega=2.0):
    """``Re nu_+ / sqrt(omega / (2 alpha))``; tends to one as ``alpha -> 0``."""
    ev = linops.talpha_eigenvalues(alpha, omega)
    return float(ev[1].real / np.sqrt(omega / (2 * alpha)))


def _d_residual(coeffs, lam, alpha, u, v):
    """Residual of ``u'' + (2i/alpha + omega) u' - u/alpha^2 = (lam - f1) u - f2 v``."""
    p = coeffs.period
    a21, a22 = linops.talpha_coefficients(alpha, coeffs.omega)
    g = (lam - coeffs.f1) * u - coeffs.f2 * v
    return _second_order_residual(u, a21, a22, g, p)


def check_D(rng, n_instances, coeffs=None):
    coeffs = manufactured_coefficients(64) if coeffs is None else coeffs
    p, n = coeffs.period, coeffs.n
    res, shoot = [], []
    f1i, f2i = _interp(coeffs.f1, p), _interp(coeffs.f2, p)
    for _ in range(n_instances):
        alpha = rng.uniform(0.1, 0.25)
        lam = complex(rng.uniform(-2, 0), rng.uniform(-0.5, 0.5))
        v = random_smooth(rng, n, p)
        u = linops.solve_D(linops.ScalarPeriodicProblem(lam, alpha, coeffs), v)
        res.append(_d_residual(coeffs, lam, alpha, u, v))
        a21, a22 = linops.talpha_coefficients(alpha, coeffs.omega)
        vi = _interp(v, p)

        def a_of_x(x, a21=a21, a22=a22, lam=lam):
            out = np.zeros((len(x), 2, 2), dtype=complex)
            out[:, 0, 1] = 1.0
            out[:, 1, 0] = a21 + lam - f1i(x)
            out[:, 1, 1] = a22
            return out

        def g_of_x(x, vi=vi):
            out = np.zeros((len(x), 2), dtype=complex)
            out[:, 1] = -f2i(x) * vi(x)
            return out

        ref = shooting_periodic(a_of_x, g_of_x, p, n)[:, 0]
        shoot.append(np.max(np.abs(u - ref)) / max(np.max(np.abs(ref)), 1e-300))
    return [OracleCheck("D residual", max(res), RESIDUAL_TOL, "max"),
            OracleCheck("D shooting", max(shoot), SHOOTING_TOL, "max")]


def _slow_ivp(coeffs, lam, u):
    """Integrate ``omega v' = (lam - g2) v - g1 u`` from ``v(0) = 1``."""
    p = coeffs.period
    g1i, g2i, ui = _interp(coeffs.g1, p), _interp(coeffs.g2, p), _interp(u, p)
    x = np.append(coeffs.x, p)

    def rhs(t, y):
        t = np.atleast_1d(t)
        return ((lam - g2i(t)) * y - g1i(t) * ui(t)) / coeffs.omega

    sol = solve_ivp(rhs, (0.0, p), np.array([1.0 + 0j]), method="DOP853", t_eval=x,
                    rtol=1e-12, atol=1e-14)
    return sol.y[0]


def check_C(rng, n_instances, coeffs=None):
    coeffs = manufactured_coefficients(64) if coeffs is None else coeffs
    shoot = []
    for _ in range(n_instances):
        # on the branch v is periodic, so its interpolant is spectrally accurate
        alpha = rng.uniform(0.05, 0.25)
        lam = linops.find_lambda_root(coeffs, alpha, tol=1e-12)
        prob = linops.ScalarPeriodicProblem(lam, alpha, coeffs)
        v, delta = linops.solve_C_and_delta(prob)
        u = linops.solve_D(prob, v[:-1])
        ref = _slow_ivp(coeffs, lam, u)
        err = max(np.max(np.abs(v - ref)), abs(delta - (ref[-1] - ref[0])))
        shoot.append(err / np.max(np.abs(ref)))
    return [OracleCheck("C/Delta integration", max(shoot), SHOOTING_TOL, "max")]


def check_center_stable(rng, n_instances, n=64):
    res, shoot = [], []
    for _ in range(n_instances):
        period = rng.uniform(2.0, 6.0)
        eta_c = complex(rng.uniform(-0.05, 0.05), rng.uniform(-0.3, 0.3))
        eta_s = complex(-rng.uniform(2.0, 5.0), rng.uniform(-1, 1))
        b21, b22 = -eta_c * eta_s, eta_c + eta_s
        h = random_smooth(rng, n, period)
        a_c = linops.center_amplitude(b21, b22, h, period)
        v, solv = linops.solve_center_stable(b21, b22, h, period, a_c)
        res.append(max(abs(solv), abs(v[-1] - v[0])) / np.max(np.abs(v)))
        ref = _second_order_oracle(b21, b22, h, period)
        shoot.append(np.max(np.abs(v[:-1] - ref)) / np.max(np.abs(ref)))
        res.append(_second_order_residual(v[:-1], b21, b22, h, period))
    return [OracleCheck("center-stable periodicity/residual", max(res), RESIDUAL_TOL, "max"),
            OracleCheck("center-stable shooting", max(shoot), SHOOTING_TOL, "max")]


def d_norm_slope(coeffs=None, lam=-1.0, alphas=ALPHAS, n_tests=10, seed=1):
    """Order in ``alpha`` of ``max ||D(lambda, alpha) v|| / ||v||`` over smooth ``v``.

    The test functions are low-order trigonometric polynomials (plus
    ``v = 1``), the setting of the bound ``||D v|| <= C alpha ||v||``.
    """
    coeffs = manufactured_coefficients() if coeffs is None else coeffs
    rng = np.random.default_rng(seed)
    vs = np.stack([np.ones(coeffs.n)] + [random_smooth(rng, coeffs.n, coeffs.period)
                                         for _ in range(n_tests)], axis=1)
    norms = []
    for a in alphas:
        u = linops.solve_D(linops.ScalarPeriodicProblem(lam, a, coeffs), vs)
        norms.append(np.max(np.max(np.abs(u), axis=0) / np.max(np.abs(vs), axis=0)))
    return _slope(alphas, norms)


def c_deviation_slope(coeffs=None, lam=-1.0 + 0.2j, alphas=ALPHAS):
    """Order in ``alpha`` of ``||C(lambda, alpha) - e^{(lambda - gbar) x / omega}||``."""
    coeffs = manufactured_coefficients() if coeffs is None else coeffs
    x = np.append(coeffs.x, coeffs.period)
    base = np.exp((lam - coeffs.gbar) * x / coeffs.omega)
    dev = []
    for a in alphas:
        v, _ = linops.solve_C_and_delta(linops.ScalarPeriodicProblem(lam, a, coeffs))
        dev.append(np.max(np.abs(v - base)))
    return _slope(alphas, dev)


def run_suite(seed=0, n_instances=20):
    """All operator checks with a fixed PRNG seed; returns a list of :class:`OracleCheck`."""
    rng = np.random.default_rng(seed)
    checks = []
    checks += check_periodic_linear(rng, n_instances)
    checks += check_second_order(rng, n_instances)
    checks += check_talpha(rng, n_instances)
    checks += check_D(rng, n_instances)
    checks += check_C(rng, n_instances)
    checks += check_center_stable(rng, n_instances)
    checks.append(OracleCheck("T(alpha) remainder slope", talpha_remainder_slope(),
                              SLOPE_MIN_T4, "min"))
    ratio = abs(talpha_eigenvalue_ratio(1e-4) - 1.0)
    checks.append(OracleCheck("T(alpha) eigenvalue ratio deviation", ratio, 0.05, "max"))
    checks.append(OracleCheck("D norm slope", d_norm_slope(), SLOPE_MIN_LINEAR, "min"))
    checks.append(OracleCheck("C deviation slope", c_deviation_slope(), SLOPE_MIN_LINEAR, "min"))
    return checks
