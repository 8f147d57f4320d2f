"""Spatial Floquet exponents and absolute spectrum.

For fixed ``lambda`` the spatial exponents ``nu`` are the values for which

    P(lambda, nu) Vbar = D (d/dx + nu)^2 Vbar + omega (d/dx [+ nu]) Vbar + J(x) Vbar - lambda Vbar

has a nontrivial periodic solution. The drift carries ``nu`` only in the
wave-train frame; in the spiral frame it does not, so there the exponent set
is not invariant under ``nu -> nu + i kappa`` (the shift moves ``lambda`` by
``-i omega kappa``, i.e. to another rotational copy). Folding into the strip
``Im nu in (-kappa/2, kappa/2]`` therefore represents the union over copies.

A point ``lambda`` lies in the absolute spectrum when the innermost right and
left exponents, split at the Morse index fixed for ``Re lambda >> 1``, have
equal real parts.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment, minimize_scalar

from . import fourier
from .errors import AmbiguityError, DegenerateExpansionError, DomainError, NumericalError, StalledBranchError
from .kinetics import PeriodicCoefficients

log = logging.getLogger(__name__)

FRAMES = ("spiral", "wavetrain")
CASES = ("case1", "case2")


@dataclass(frozen=True)
class SpatialOperator:
    """``D (d/dx + nu)^2 + omega (d/dx [+ nu]) + J(x)`` on one period.

    ``jac`` has shape ``(n, n, N)``: the ``n x n`` coefficient matrix at each
    of ``N`` grid points.
    """

    diffusion: np.ndarray
    omega: float
    jac: np.ndarray
    period: float
    frame: str = "spiral"
    _mats: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.diffusion, dtype=float))
        jac = np.asarray(self.jac)
        if jac.ndim != 3 or jac.shape[:2] != (len(d), len(d)):
            raise ValueError("jac must have shape (n, n, N) matching the diffusion vector")
        if np.any(d < 0):
            raise DomainError("diffusion coefficients must be nonnegative")
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        if np.any(d == 0) and self.omega == 0:
            raise DomainError("a non-diffusing component needs nonzero drift")
        object.__setattr__(self, "diffusion", d)
        object.__setattr__(self, "jac", jac)
        object.__setattr__(self, "_mats", self._build())

    @classmethod
    def from_coefficients(cls, coeffs, frame="spiral"):
        jac = np.array([[coeffs.f1, coeffs.f2], [coeffs.g1, coeffs.g2]])
        return cls(np.array([1.0, coeffs.delta]), coeffs.omega, jac, coeffs.period, frame)

    @classmethod
    def constant(cls, jac, diffusion, omega, kappa=1.0, n=16, frame="wavetrain"):
        """Constant coefficients sampled on ``n`` points; useful as an oracle."""
        jac = np.atleast_2d(np.asarray(jac))
        stacked = np.repeat(jac[:, :, None], n, axis=2)
        return cls(np.atleast_1d(diffusion), omega, stacked, 2.0 * np.pi / kappa, frame)

    @property
    def n_comp(self):
        return len(self.diffusion)

    @property
    def n_grid(self):
        return self.jac.shape[2]

    @property
    def kappa(self):
        return 2.0 * np.pi / self.period

    @property
    def scale(self):
        return float(np.max(np.abs(self.jac)))

    @property
    def strip_count(self):
        """Exponents per strip in the wave-train frame (first-order system dimension)."""
        d = self.diffusion
        return int(2 * np.sum(d > 0) + np.sum(d == 0))

    def _build(self):
        n, npts = self.n_comp, self.n_grid
        k = fourier.wavenumbers(npts, self.period)
        d1 = fourier.symbol_matrix(1j * k)
        d2 = fourier.symbol_matrix(-(k**2))
        eye = np.eye(npts)
        size = n * npts
        a2 = np.zeros((size, size), dtype=complex)
        a1 = np.zeros_like(a2)
        a0 = np.zeros_like(a2)
        idx = np.arange(npts)
        for j in range(n):
            s = slice(j * npts, (j + 1) * npts)
            dj = self.diffusion[j]
            a2[s, s] = dj * eye
            a1[s, s] = 2.0 * dj * d1 + (self.omega * eye if self.frame == "wavetrain" else 0.0)
            a0[s, s] = dj * d2 + self.omega * d1
            for m in range(n):
                a0[j * npts + idx, m * npts + idx] += self.jac[j, m]
        return a2, a1, a0

    def matrices(self):
        """``(A2, A1, A0)`` with ``P(lambda, nu) = nu^2 A2 + nu A1 + A0 - lambda``."""
        return self._mats

    def pencil(self, lam, nu):
        a2, a1, a0 = self._mats
        return nu * nu * a2 + nu * a1 + a0 - lam * np.eye(a0.shape[0])

    def blocks(self):
        """Component index groups: diffusing, first-order, and eliminated."""
        d = self.diffusion
        diff = [j for j in range(self.n_comp) if d[j] > 0]
        zero = [j for j in range(self.n_comp) if d[j] == 0]
        if self.frame == "wavetrain":
            return diff, zero, []
        return diff, [], zero


@dataclass(frozen=True)
class SpatialEigenSet:
    """Spatial exponents at one ``lambda``, folded into the fundamental strip.

    ``labels`` are ``"right"``/``"left"``; :func:`spatial_exponents` assigns
    them by the sign of ``Re nu`` and :func:`label_by_continuity` transports
    them from a reference point.
    """

    lam: complex
    exponents: np.ndarray
    labels: tuple
    kappa: float

    @property
    def morse_index(self):
        return sum(1 for s in self.labels if s == "right")

    def right(self):
        return self.exponents[[s == "right" for s in self.labels]]

    def left(self):
        return self.exponents[[s == "left" for s in self.labels]]


@dataclass(frozen=True)
class AbsolutePoint:
    lam: complex
    nu_left: complex
    nu_right: complex
    tau: float


@dataclass(frozen=True)
class AbsoluteBranch:
    points: list
    case_tag: str = "case1"
    endpoint: str = ""

    def __len__(self):
        return len(self.points)

    @property
    def lam(self):
        return np.array([p.lam for p in self.points])

    @property
    def tau(self):
        return np.array([p.tau for p in self.points])


def _as_operator(obj, frame=None):
    if isinstance(obj, SpatialOperator):
        if frame is not None and frame != obj.frame:
            raise ValueError(f"operator is in the {obj.frame} frame, not {frame}")
        return obj
    if isinstance(obj, PeriodicCoefficients):
        return SpatialOperator.from_coefficients(obj, frame or "spiral")
    raise TypeError("expected PeriodicCoefficients or SpatialOperator")


def fold(nu, kappa):
    """Representative of ``nu`` modulo ``i kappa`` with ``Im`` in ``(-kappa/2, kappa/2]``."""
    nu = np.asarray(nu, dtype=complex)
    m = np.ceil(nu.imag / kappa - 0.5)
    out = nu - 1j * kappa * m
    return complex(out) if out.ndim == 0 else out


def _index(groups, npts):
    return np.concatenate([np.arange(j * npts, (j + 1) * npts) for j in groups]) if groups else \
        np.zeros(0, dtype=int)


def _companion_raw(op, lam):
    """All finite exponents of the discretised pencil, unfolded."""
    a2, a1, a0 = op.matrices()
    npts = op.n_grid
    diff, first, elim = op.blocks()
    p0 = a0 - lam * np.eye(a0.shape[0])
    keep = _index(diff + first, npts)
    ie = _index(elim, npts)
    p0k = p0[np.ix_(keep, keep)]
    if len(ie):
        pee = p0[np.ix_(ie, ie)]
        try:
            p0k = p0k - p0[np.ix_(keep, ie)] @ np.linalg.solve(pee, p0[np.ix_(ie, keep)])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eliminated block singular at lambda={lam}: {exc}")
    nd = len(diff) * npts
    nf = len(first) * npts
    a1k = a1[np.ix_(keep, keep)]
    a2d = np.diag(a2[np.ix_(keep, keep)])[:nd]
    a1f = np.diag(a1k)[nd:] if nf else np.zeros(0)
    size = 2 * nd + nf
    c = np.zeros((size, size), dtype=complex)
    # unknowns (x_D, y_D = nu x_D, x_F)
    c[:nd, nd:2 * nd] = np.eye(nd)
    c[nd:2 * nd, :nd] = -p0k[:nd, :nd] / a2d[:, None]
    c[nd:2 * nd, nd:2 * nd] = -a1k[:nd, :nd] / a2d[:, None]
    if nf:
        c[nd:2 * nd, 2 * nd:] = -p0k[:nd, nd:] / a2d[:, None]
        c[2 * nd:, :nd] = -p0k[nd:, :nd] / a1f[:, None]
        c[2 * nd:, 2 * nd:] = -p0k[nd:, nd:] / a1f[:, None]
    try:
        ev = linalg.eigvals(c)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"exponent eigensolve failed at lambda={lam}: {exc}")
    return ev[np.isfinite(ev)]


def _strip_representatives(op, raw, merge_tol=1e-6):
    """One accurate copy per exponent for the iκ-periodic wave-train frame."""
    kappa = op.kappa
    order = np.argsort(np.abs(raw.imag))
    chosen = []
    for nu in raw[order]:
        f = fold(nu, kappa)
        if all(abs(f - c) > merge_tol * (1 + abs(f)) for c in chosen):
            chosen.append(f)
        if len(chosen) == op.strip_count:
            break
    return np.array(chosen)


def _sign_labels(exponents):
    return tuple("right" if z.real > 0 else "left" for z in exponents)


def _sort(exponents):
    return exponents[np.lexsort((exponents.imag, -exponents.real))]


def _make_set(op, lam, exponents):
    ex = _sort(np.asarray(exponents, dtype=complex))
    return SpatialEigenSet(complex(lam), ex, _sign_labels(ex), op.kappa)


def companion_exponents(op, lam, folded=True):
    """Companion-backend exponents.

    In the wave-train frame one representative per strip is returned. In the
    spiral frame all discretised exponents are returned, folded into the
    strip unless ``folded=False`` (the unfolded values are the ones that
    solve the pencil at this ``lambda``).
    """
    raw = _companion_raw(op, lam)
    if op.frame == "wavetrain":
        return _strip_representatives(op, raw)
    return fold(raw, op.kappa) if folded else raw


# ---------------------------------------------------------------- monodromy


def _first_order_rhs(op, mu):
    """Right-hand side of ``D W'' + omega W' + (J - mu) W = 0`` as a first-order system."""
    d = op.diffusion
    n = op.n_comp
    jfun = fourier.interpolant(op.jac, op.period)
    pos = [j for j in range(n) if d[j] > 0]
    slots = {}
    i = 0
    for j in range(n):
        slots[j] = i
        i += 2 if d[j] > 0 else 1
    dim = i
    w_idx = np.array([slots[j] for j in range(n)])

    def rhs(x, y):
        y = y.reshape(dim, -1)
        jx = jfun(x) - mu * np.eye(n)
        w = y[w_idx]
        react = jx @ w
        out = np.empty_like(y)
        for j in range(n):
            s = slots[j]
            if d[j] > 0:
                out[s] = y[s + 1]
                out[s + 1] = -(op.omega * y[s + 1] + react[j]) / d[j]
            else:
                out[s] = -react[j] / op.omega
        return out.ravel()

    bound = np.max(np.abs(op.jac)) + abs(mu)
    rate = max(abs(op.omega) / min(d[pos]) if pos else 0.0, np.sqrt(bound / min(d[pos])) if pos else 0.0,
               bound / abs(op.omega) if len(pos) < n else 0.0)
    return rhs, dim, rate


def _segment_propagators(op, mu, rtol=1e-11, growth=3.0):
    rhs, dim, rate = _first_order_rhs(op, mu)
    m = max(1, int(np.ceil(rate * op.period / growth)))
    edges = np.linspace(0.0, op.period, m + 1)
    props = []
    for a, b in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (a, b), np.eye(dim, dtype=complex).ravel(), method="DOP853",
                        rtol=rtol, atol=rtol * 1e-3)
        if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
            raise NumericalError(f"monodromy integration failed on [{a:.4g}, {b:.4g}]: {sol.message}")
        props.append(sol.y[:, -1].reshape(dim, dim))
    return props


def monodromy_multipliers(op, mu):
    """``(z, m)``: eigenvalues of the lifted block-cyclic matrix and the segment count.

    The Floquet multipliers are ``z^m``; working with ``z`` keeps stiff
    growth rates representable.
    """
    props = _segment_propagators(op, mu)
    m = len(props)
    dim = props[0].shape[0]
    big = np.zeros((m * dim, m * dim), dtype=complex)
    for i, p in enumerate(props):
        r = ((i + 1) % m) * dim
        big[r:r + dim, i * dim:(i + 1) * dim] = p
    return linalg.eigvals(big), m


def monodromy_exponents(op, lam):
    """Exponents ``m log(z) / period`` folded into the strip (wave-train frame)."""
    z, m = monodromy_multipliers(op, lam)
    nus = fold(m * np.log(z.astype(complex)) / op.period, op.kappa)
    return _strip_representatives(op, nus, merge_tol=1e-5)


def monodromy_mismatch(op, lam, nu):
    """Distance of ``e^{nu T}`` from the Floquet multipliers, on a log scale.

    In the spiral frame the period map is that of the wave-train equation at
    ``lambda + omega nu``.
    """
    mu = lam + op.omega * nu if op.frame == "spiral" else lam
    wt = SpatialOperator(op.diffusion, op.omega, op.jac, op.period, "wavetrain")
    z, m = monodromy_multipliers(wt, mu)
    logs = m * np.log(z.astype(complex)) / op.period
    return float(np.min(np.abs(fold(logs - nu, op.kappa))))


def _refine_spiral(op, lam, nu0, tol=1e-12, max_iter=20):
    """Newton refinement of a spiral-frame exponent from the monodromy alone."""
    wt = SpatialOperator(op.diffusion, op.omega, op.jac, op.period, "wavetrain")

    def residual(nu):
        z, m = monodromy_multipliers(wt, lam + op.omega * nu)
        logs = m * np.log(z.astype(complex)) / op.period
        d = fold(logs - nu, op.kappa)
        return d[np.argmin(np.abs(d))]

    nu = complex(nu0)
    for _ in range(max_iter):
        r = residual(nu)
        if abs(r) < tol * (1 + abs(nu)):
            return nu
        h = 1e-7 * (1 + abs(nu))
        slope = (residual(nu + h) - r) / h
        nu = nu + r / (1 - slope) if abs(1 - slope) > 1e-14 else nu + r
    return nu


def spatial_exponents(obj, lam, backend="companion", frame=None, window=None):
    """Spatial exponents at ``lam`` as a :class:`SpatialEigenSet`.

    ``backend="companion"`` solves the Fourier-discretised quadratic pencil;
    ``backend="monodromy"`` integrates the first-order system over one period
    with multiple shooting. In the spiral frame the monodromy backend refines
    the companion exponents with ``|Re nu| <= window`` (default 5) by Newton
    iteration on the period map alone. A failed integration falls back to the
    companion result with a logged diagnostic.
    """
    op = _as_operator(obj, frame)
    lam = complex(lam)
    if backend == "companion":
        return _make_set(op, lam, companion_exponents(op, lam))
    if backend != "monodromy":
        raise ValueError(f"unknown backend {backend!r}")
    try:
        if op.frame == "wavetrain":
            ex = monodromy_exponents(op, lam)
        else:
            window = 5.0 if window is None else window
            base = companion_exponents(op, lam)
            ex = np.array([_refine_spiral(op, lam, nu) for nu in base if abs(nu.real) <= window])
            ex = fold(ex, op.kappa)
    except NumericalError as exc:
        log.warning("monodromy backend failed (%s); using companion exponents", exc)
        return _make_set(op, lam, companion_exponents(op, lam))
    return _make_set(op, lam, ex)


def hausdorff(a, b, kappa=None):
    """Hausdorff distance between finite exponent sets (modulo ``i kappa`` if given)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    diff = a[:, None] - b[None, :]
    if kappa is not None:
        diff = fold(diff, kappa)
    d = np.abs(diff)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# ---------------------------------------------------------------- labels


def reference_lambda(obj, re_ref=None):
    op = _as_operator(obj)
    return complex(10.0 * (1.0 + op.scale) if re_ref is None else re_ref)


def morse_split(obj, re_ref=None, frame=None):
    """Number of right exponents at the reference point ``Re lambda >> 1``."""
    op = _as_operator(obj, frame)
    s = spatial_exponents(op, reference_lambda(op, re_ref))
    return s.morse_index


def _match(prev, new, kappa, tie_tol):
    diff = prev[:, None] - new[None, :]
    cost = np.abs(fold(diff, kappa))
    rows, cols = linear_sum_assignment(cost)
    for r, c in zip(rows, cols):
        best = cost[r, c]
        others = np.delete(cost[r], c)
        if len(others) and others.min() - best < tie_tol:
            return None
    return cols


def label_by_continuity(obj, path, frame=None, tie_tol=1e-6, re_ref=None, max_refine=8):
    """Transport right/left labels from ``path[0]`` along a path of ``lambda`` values.

    ``path[0]`` must satisfy ``Re >= re_ref`` (default ``10 (1 + max|coeffs|)``)
    where labels are given by the sign of ``Re nu``. Intermediate points are
    inserted (up to ``max_refine`` halvings per segment) when the nearest
    neighbour matching is ambiguous.
    """
    op = _as_operator(obj, frame)
    path = [complex(p) for p in path]
    limit = reference_lambda(op, re_ref).real
    if path[0].real < limit - 1e-12:
        raise DomainError(f"path must start at Re lambda >= {limit:.4g}")
    first = spatial_exponents(op, path[0])
    out = [first]
    prev_ex, prev_lab = first.exponents, first.labels
    prev_lam = path[0]
    for target in path[1:]:
        stack = [target]
        depth = 0
        while stack:
            lam = stack[-1]
            ex = companion_exponents(op, lam)
            if len(ex) != len(prev_ex):
                raise AmbiguityError(f"exponent count changed between {prev_lam} and {lam}")
            cols = _match(prev_ex, ex, op.kappa, tie_tol)
            if cols is None:
                depth += 1
                if depth > max_refine:
                    raise AmbiguityError(f"label transport ambiguous near lambda={lam}; refine the path")
                stack.append(0.5 * (prev_lam + lam))
                continue
            labels = [None] * len(ex)
            for r, c in enumerate(cols):
                labels[c] = prev_lab[r]
            prev_ex, prev_lab, prev_lam = ex, tuple(labels), lam
            stack.pop()
        out.append(SpatialEigenSet(complex(target), prev_ex, prev_lab, op.kappa))
    return out


def morse_gap(obj, lam, split, frame=None):
    """``Re nu_(split) - Re nu_(split+1)`` with exponents ordered by decreasing real part.

    It vanishes exactly on the absolute spectrum.
    """
    op = _as_operator(obj, frame)
    re = np.sort(companion_exponents(op, complex(lam)).real)[::-1]
    return float(re[split - 1] - re[split])


def split_pair(obj, lam, split, frame=None):
    """The exponents on either side of the split: ``(nu_left, nu_right)``.

    The pair is ordered so that ``Im nu_left >= Im nu_right`` when the real
    parts coincide, making ``tau`` nonnegative.
    """
    op = _as_operator(obj, frame)
    ex = companion_exponents(op, complex(lam), folded=False)
    ex = ex[np.lexsort((-ex.imag, -ex.real))]
    right, left = ex[split - 1], ex[split]
    if left.imag < right.imag:
        left, right = right, left
    return complex(left), complex(right)


def find_absolute_seed(obj, lam_a, lam_b, split, frame=None, xtol=1e-10):
    """Minimise the Morse gap on the segment ``[lam_a, lam_b]``; returns ``(lambda, gap)``."""
    op = _as_operator(obj, frame)
    lam_a, lam_b = complex(lam_a), complex(lam_b)

    def gap(t):
        return morse_gap(op, lam_a + t * (lam_b - lam_a), split)

    res = minimize_scalar(gap, bounds=(0.0, 1.0), method="bounded", options={"xatol": xtol})
    return lam_a + res.x * (lam_b - lam_a), float(res.fun)


# ---------------------------------------------------------------- branches


class _Bordered:
    """Scalar ``s(lambda, nu)`` vanishing exactly when ``P(lambda, nu)`` is singular."""

    def __init__(self, op, lam, nu):
        mat = op.pencil(lam, nu)
        u, _, vh = linalg.svd(mat)
        self.op = op
        self.b = u[:, -1]
        self.c = vh[-1].conj()

    def __call__(self, lam, nu):
        mat = self.op.pencil(lam, nu)
        n = mat.shape[0]
        big = np.zeros((n + 1, n + 1), dtype=complex)
        big[:n, :n] = mat
        big[:n, n] = self.b
        big[n, :n] = self.c.conj()
        rhs = np.zeros(n + 1, dtype=complex)
        rhs[n] = 1.0
        return linalg.solve(big, rhs)[n]


def _newton_pair(op, lam, nu_l, tau, tol=1e-12, max_iter=30):
    """Solve ``P(lam, nu_l)`` and ``P(lam, nu_l - i tau)`` singular for ``(lam, nu_l)``."""
    f_l = _Bordered(op, lam, nu_l)
    f_r = _Bordered(op, lam, nu_l - 1j * tau)
    x = np.array([lam, nu_l], dtype=complex)

    def func(z):
        return np.array([f_l(z[0], z[1]), f_r(z[0], z[1] - 1j * tau)])

    fx = func(x)
    for _ in range(max_iter):
        h = 1e-7 * (1.0 + np.abs(x))
        jac = np.empty((2, 2), dtype=complex)
        for j in range(2):
            e = np.zeros(2, dtype=complex)
            e[j] = h[j]
            jac[:, j] = (func(x + e) - func(x - e)) / (2 * h[j])
        try:
            step = np.linalg.solve(jac, fx)
        except np.linalg.LinAlgError:
            break
        x = x - step
        fx = func(x)
        if np.max(np.abs(step)) < tol * (1.0 + np.max(np.abs(x))):
            return complex(x[0]), complex(x[1])
    raise StalledBranchError(f"Newton failed at tau={tau}", last_point=None)


def trace_absolute_branch(obj, lambda_seed, tau_range, n_points=50, split=None, frame=None,
                          seed_tol=1e-2, case_tag="case1", nu_pair=None, max_halvings=8):
    """Continue an absolute-spectrum branch in ``tau = Im nu_left - Im nu_right``.

    By default the designated pair is the one on either side of the Morse
    split at ``lambda_seed`` (exponents ordered by real part); ``nu_pair``
    designates it explicitly by approximate ``(nu_left, nu_right)``, which are
    snapped to the nearest computed exponents. The pair's real parts must
    agree within ``seed_tol``. The seed is corrected by Newton iteration at
    its own ``tau``, continued to ``tau_range[0]`` and then across the range,
    recording ``n_points`` equispaced values of ``tau``. The defining
    equations ``P(lambda, nu_left)`` and ``P(lambda, nu_left - i tau)``
    singular are holomorphic in ``(lambda, nu_left)``, so
    ``Re nu_left = Re nu_right`` holds by construction. A range reaching
    ``tau = 0`` (the two exponents collide) is reported as a branch endpoint.
    """
    op = _as_operator(obj, frame)
    if nu_pair is None:
        if split is None:
            split = morse_split(op)
        nu_l, nu_r = split_pair(op, lambda_seed, split)
    else:
        ex = companion_exponents(op, complex(lambda_seed), folded=False)
        nu_l = complex(ex[np.argmin(np.abs(ex - nu_pair[0]))])
        nu_r = complex(ex[np.argmin(np.abs(ex - nu_pair[1]))])
        if nu_l == nu_r:
            raise AmbiguityError("both designated exponents snap to the same value")
    if abs(nu_l.real - nu_r.real) > seed_tol:
        raise DomainError(
            f"seed gap {abs(nu_l.real - nu_r.real):.3g} exceeds seed_tol={seed_tol}"
        )
    tau0 = nu_l.imag - nu_r.imag
    lam, nu = _newton_pair(op, complex(lambda_seed), nu_l, tau0)
    taus = np.linspace(float(tau_range[0]), float(tau_range[1]), int(n_points))
    h_max = abs(taus[1] - taus[0]) if len(taus) > 1 else max(abs(taus[0] - tau0), 1e-3)
    state = {"lam": lam, "nu": nu, "tau": tau0, "prev": None}

    def advance(t_to):
        # natural continuation with a secant predictor and step halving
        while abs(t_to - state["tau"]) > 1e-12 * (1 + abs(t_to)):
            lam, nu, t = state["lam"], state["nu"], state["tau"]
            h = np.clip(t_to - t, -h_max, h_max)
            for _ in range(max_halvings + 1):
                prev = state["prev"]
                if prev is not None:
                    pl = lam + (lam - prev[0]) / (t - prev[2]) * h
                    pn = nu + (nu - prev[1]) / (t - prev[2]) * h
                else:
                    pl, pn = lam, nu
                try:
                    nl, nn = _newton_pair(op, pl, pn, t + h)
                    drift = max(abs(nl - pl) / (1 + abs(pl)), abs(nn - pn) / min(op.kappa, 1 + abs(pn)))
                    if drift < 0.1:
                        break
                except (StalledBranchError, linalg.LinAlgError):
                    pass
                h *= 0.5
            else:
                raise StalledBranchError(
                    f"absolute branch stalled at tau={t:.6g}",
                    last_point=AbsolutePoint(lam, nu, nu - 1j * t, float(t)),
                )
            state.update(prev=(lam, nu, t), lam=nl, nu=nn, tau=t + h)

    def collide():
        # the pair is a double root at tau = 0, so Newton is singular there; lambda and
        # the mean exponent are even in tau and are extrapolated in tau^2
        t = state["tau"]
        probe = 0.5 * t if abs(t) > 1e-8 else np.sign(t or 1.0) * 1e-3
        advance(probe)
        l1, n1, t1 = state["lam"], state["nu"], state["tau"]
        advance(2.0 * probe)
        l2, n2, t2 = state["lam"], state["nu"], state["tau"]
        w = t1**2 / (t2**2 - t1**2)
        lam = l1 - (l2 - l1) * w
        mid = (n1 - 0.5j * t1) - ((n2 - 0.5j * t2) - (n1 - 0.5j * t1)) * w
        return AbsolutePoint(lam, mid, mid, 0.0)

    points = []
    for t_next in taus:
        t = float(t_next)
        if abs(t) < 1e-10:
            if not points:
                advance(np.sign(tau0) * min(h_max, abs(tau0)))
            points.append(collide())
            continue
        advance(t)
        points.append(AbsolutePoint(state["lam"], state["nu"], state["nu"] - 1j * t, t))
    endpoint = "collision" if np.any(np.abs(taus) < 1e-10) else ""
    return AbsoluteBranch(points=points, case_tag=case_tag, endpoint=endpoint)


# ---------------------------------------------------------------- cases


def classify_case(lambda3):
    """``case1`` for ``lambda3 >= 0`` (zero defers to higher imaginary terms), else ``case2``."""
    return "case2" if lambda3 < 0 else "case1"


def local_case1_prediction(lambda0, r_values):
    """Leading-order absolute spectrum ``lambda0 - r^2`` left of the cusp."""
    r = np.asarray(r_values, dtype=float)
    if np.any(r < 0):
        raise DomainError("r values must be nonnegative")
    return complex(lambda0) - r.astype(complex) ** 2


def newton_polygon_roots(lambda_local, lambda2, lambda3):
    """Leading-order spatial exponents near the cusp.

    The local dispersion relation ``lambda = lambda2 alpha^2 + 2i lambda3 alpha^3``
    is rewritten with ``l2 = -lambda2 > 0`` as
    ``-l2 alpha^2 + i l3 alpha^3 - lambda = 0``. The Newton polygon gives
    ``alpha_{1,2} ~ +-i sqrt(lambda) / sqrt(l2)`` and ``alpha_3 ~ -i l2 / l3``;
    mapping through ``nu = i / alpha`` yields the returned
    ``nu_{1,2} = +-sqrt(l2) / sqrt(lambda)`` and ``nu_3 = -l3 / l2``. The
    inputs are taken with the sign convention of :mod:`spiralspec.cusp`;
    ``l3 = 2 lambda3`` carries the factor two of that convention.
    """
    if lambda2 == 0:
        raise DegenerateExpansionError("lambda2 = 0: the Newton polygon degenerates")
    lam = complex(lambda_local)
    if lam == 0:
        raise DomainError("lambda_local must be nonzero")
    l2 = -float(lambda2)
    l3 = 2.0 * float(lambda3)
    root = np.sqrt(complex(l2)) / np.sqrt(lam)
    return complex(root), complex(-root), complex(-l3 / l2)


# ---------------------------------------------------------------- region sampling


def winding_number(curve, points):
    """Winding number of the closed polygon ``curve`` around each point."""
    z = np.asarray(curve, dtype=complex)
    z = np.append(z, z[0])
    p = np.atleast_1d(np.asarray(points, dtype=complex))
    d = z[None, :] - p[:, None]
    ang = np.angle(d[:, 1:] / d[:, :-1])
    return np.rint(ang.sum(axis=1) / (2 * np.pi)).astype(int)


def morse_counts(obj, lams, frame=None):
    """Number of exponents with positive real part at each ``lambda``."""
    op = _as_operator(obj, frame)
    return np.array([int(np.sum(companion_exponents(op, complex(l)).real > 0)) for l in lams])


@dataclass(frozen=True)
class RegionSample:
    """Grid points of a box near a cusp whose Morse count matches a reference.

    ``points`` and ``gaps`` are restricted to the matching points; ``counts``
    covers the full grid.
    """

    grid: np.ndarray
    counts: np.ndarray
    reference_count: int
    points: np.ndarray
    gaps: np.ndarray


def sample_region(obj, lambda0, re_span=(0.05, 0.9), im_span=(-0.3, 0.3), shape=(20, 10),
                  split=None, eps=1e-3, frame=None):
    """Sample the region to the right of ``lambda0`` on a ``shape`` box grid.

    The box is ``lambda0 + [re_span] x i[im_span]``. Points are kept when
    their count of exponents with positive real part equals the count at
    ``lambda0 + eps``, so the sample stays in the component adjoining the
    cusp. The Morse gap at the split is returned for every kept point.
    """
    op = _as_operator(obj, frame)
    if split is None:
        split = morse_split(op)
    lam0 = complex(lambda0)
    re = lam0.real + np.linspace(re_span[0], re_span[1], shape[0])
    im = lam0.imag + np.linspace(im_span[0], im_span[1], shape[1])
    grid = (re[:, None] + 1j * im[None, :]).ravel()
    ref = int(morse_counts(op, [lam0 + eps])[0])
    counts = np.empty(grid.size, dtype=int)
    gaps = np.empty(grid.size)
    for i, lam in enumerate(grid):
        ex = companion_exponents(op, complex(lam))
        counts[i] = int(np.sum(ex.real > 0))
        r = np.sort(ex.real)[::-1]
        gaps[i] = r[split - 1] - r[split]
    keep = counts == ref
    return RegionSample(grid=grid, counts=counts, reference_count=ref, points=grid[keep],
                        gaps=gaps[keep])
