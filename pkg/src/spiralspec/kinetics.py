"""Two-component reaction kinetics and linearised coefficients along a wave train.

The built-in models are the Barkley model

    u_t = u_xx + (1/eps) u (1 - u) (u - (v + b)/a)
    v_t = delta v_xx + u - v

and the Karma model

    u_t = 1.1 u_xx + 400 (-u + (u* - v^4)(1 - tanh(u - 3)) u^2 / 2)
    v_t = delta v_xx + 4 (theta_s(u - 1) / (1 - exp(-mu_K)) - v)

with the smoothed Heaviside ``theta_s(u) = (1 + tanh(s u)) / 2``.

Coefficients are always handed to the spectral code with unit u-diffusion.
When ``d_u != 1`` space is rescaled by ``sqrt(d_u)``; the factor is kept in
:attr:`PeriodicCoefficients.length_scale` so results can be mapped back.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from . import fourier
from .errors import ConfigurationError, InvalidWaveTrainError

Reaction = Callable[[Mapping[str, float], np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class KineticsModel:
    """Reaction terms, their Jacobian and the diffusion coefficients.

    ``reaction(params, u, v)`` returns ``(f, g)`` and ``jacobian(params, u, v)``
    returns ``(f_u, f_v, g_u, g_v)``; both must broadcast over arrays. A model
    without a Jacobian falls back to central differences.
    """

    name: str
    params: Mapping[str, float]
    d_u: float = 1.0
    delta: float = 0.0
    reaction: Reaction = field(default=None, repr=False, compare=False)
    jacobian: Reaction = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.d_u > 0:
            raise ConfigurationError(f"d_u must be positive, got {self.d_u}")
        if not self.delta >= 0:
            raise ConfigurationError(f"delta must be nonnegative, got {self.delta}")
        if self.reaction is None:
            raise ConfigurationError(f"model {self.name!r} has no reaction terms")
        object.__setattr__(self, "params", dict(self.params))

    def with_delta(self, delta):
        return replace(self, delta=float(delta))


def _theta(z, s):
    return 0.5 * (1.0 + np.tanh(s * z))


def _barkley_reaction(p, u, v):
    a, b, eps = p["a"], p["b"], p["epsilon"]
    f = u * (1.0 - u) * (u - (v + b) / a) / eps
    g = u - v
    return f, g


def _barkley_jacobian(p, u, v):
    a, b, eps = p["a"], p["b"], p["epsilon"]
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    fu = ((1.0 - 2.0 * u) * (u - (v + b) / a) + u * (1.0 - u)) / eps
    fv = -u * (1.0 - u) / (a * eps)
    one = np.ones_like(u + v)
    return fu, fv, one, -one


def _karma_reaction(p, u, v):
    k = p["rate_u"]
    f = k * (-u + (p["u_star"] - v**4) * (1.0 - np.tanh(u - p["u_h"])) * u**2 / 2.0)
    g = p["rate_v"] * (_theta(u - 1.0, p["s"]) / (1.0 - np.exp(-p["mu_K"])) - v)
    return f, g


def _karma_jacobian(p, u, v):
    k = p["rate_u"]
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    t = np.tanh(u - p["u_h"])
    w = p["u_star"] - v**4
    fu = k * (-1.0 + w * (-(1.0 - t**2) * u**2 / 2.0 + (1.0 - t) * u))
    fv = k * (-4.0 * v**3 * (1.0 - t) * u**2 / 2.0)
    s = p["s"]
    gu = p["rate_v"] * 0.5 * s * (1.0 - np.tanh(s * (u - 1.0)) ** 2) / (1.0 - np.exp(-p["mu_K"]))
    gv = -p["rate_v"] * np.ones_like(u + v)
    return fu, fv, gu, gv


_BUILTINS = {
    "barkley": (
        {"a": 0.7, "b": 0.001, "epsilon": 0.02},
        1.0,
        _barkley_reaction,
        _barkley_jacobian,
    ),
    "karma": (
        {"mu_K": 1.2, "s": 4.0, "rate_u": 400.0, "u_star": 1.5414, "u_h": 3.0, "rate_v": 4.0},
        1.1,
        _karma_reaction,
        _karma_jacobian,
    ),
}

_REGISTRY = {}


def register_model(name, reaction, jacobian=None, params=None, d_u=1.0):
    """Make a user-defined model available to :func:`get_model` and the CLI."""
    if name in _BUILTINS:
        raise ConfigurationError(f"cannot override built-in model {name!r}")
    _REGISTRY[name] = (dict(params or {}), float(d_u), reaction, jacobian)


def get_model(name, params=None, d_u=None, delta=0.0):
    """Instantiate a built-in or registered model, overriding defaults."""
    if name in _BUILTINS:
        defaults, du, reaction, jac = _BUILTINS[name]
    elif name in _REGISTRY:
        defaults, du, reaction, jac = _REGISTRY[name]
    else:
        raise ConfigurationError(f"unknown kinetics model {name!r}")
    merged = dict(defaults)
    for key, value in (params or {}).items():
        if key not in defaults:
            raise ConfigurationError(f"model {name!r} has no parameter {key!r}")
        merged[key] = float(value)
    return KineticsModel(
        name=name,
        params=merged,
        d_u=du if d_u is None else float(d_u),
        delta=float(delta),
        reaction=reaction,
        jacobian=jac,
    )


def evaluate_kinetics(model, u, v):
    """Reaction terms ``(f(u, v), g(u, v))``."""
    return model.reaction(model.params, u, v)


def evaluate_jacobian(model, u, v):
    """``[[f_u, f_v], [g_u, g_v]]`` at a point, or stacked over array input."""
    if model.jacobian is not None:
        fu, fv, gu, gv = model.jacobian(model.params, u, v)
    else:
        fu, fv, gu, gv = _fd_jacobian(model, u, v)
    return np.array([[fu, fv], [gu, gv]], dtype=float)


def _fd_jacobian(model, u, v, h=1e-6):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    fp, gp = evaluate_kinetics(model, u + h, v)
    fm, gm = evaluate_kinetics(model, u - h, v)
    fu, gu = (fp - fm) / (2 * h), (gp - gm) / (2 * h)
    fp, gp = evaluate_kinetics(model, u, v + h)
    fm, gm = evaluate_kinetics(model, u, v - h)
    fv, gv = (fp - fm) / (2 * h), (gp - gm) / (2 * h)
    return fu, fv, gu, gv


@dataclass(frozen=True)
class PeriodicCoefficients:
    """Linearisation ``[[f1, f2], [g1, g2]](x)`` along a wave train.

    Lengths are in units where the u-diffusion equals one; ``length_scale`` is
    the factor ``sqrt(d_u)`` relating them to the original variables
    (``x_original = length_scale * x``).
    """

    f1: np.ndarray
    f2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    kappa: float
    omega: float
    delta: float = 0.0
    length_scale: float = 1.0

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.f1, self.f2, self.g1, self.g2)]
        n = len(arrays[0])
        if any(a.shape != (n,) for a in arrays):
            raise InvalidWaveTrainError("coefficient arrays must share one 1-D shape")
        if n < 8 or n % 2:
            raise InvalidWaveTrainError(f"grid size must be even and >= 8, got {n}")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise InvalidWaveTrainError("coefficient arrays contain non-finite values")
        for name, a in zip(("f1", "f2", "g1", "g2"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not self.kappa > 0:
            raise InvalidWaveTrainError("kappa must be positive")
        if self.delta < 0:
            raise InvalidWaveTrainError("delta must be nonnegative")

    @property
    def n(self):
        return len(self.f1)

    @property
    def period(self):
        return 2.0 * np.pi / self.kappa

    @property
    def x(self):
        return fourier.grid(self.n, self.period)

    @property
    def gbar(self):
        return float(fourier.mean(self.g2))

    def with_delta(self, delta):
        return replace(self, delta=float(delta))

    @classmethod
    def from_functions(cls, f1, f2, g1, g2, kappa, omega, delta=0.0, n=128):
        """Sample callables (or constants) on an ``n``-point grid over one period."""
        x = fourier.grid(n, 2.0 * np.pi / kappa)

        def sample(c):
            return np.broadcast_to(c(x) if callable(c) else np.asarray(c, float), x.shape).copy()

        return cls(sample(f1), sample(f2), sample(g1), sample(g2), kappa, omega, delta)


def sample_coefficients(model, wavetrain):
    """Jacobian along the wave-train profile, normalised to unit u-diffusion."""
    u = np.asarray(wavetrain.u, dtype=float)
    v = np.asarray(wavetrain.v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise InvalidWaveTrainError("profile arrays must be 1-D and of equal length")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InvalidWaveTrainError("wave-train profile contains non-finite values")
    jac = evaluate_jacobian(model, u, v)
    scale = np.sqrt(model.d_u)
    return PeriodicCoefficients(
        f1=jac[0, 0],
        f2=jac[0, 1],
        g1=jac[1, 0],
        g2=jac[1, 1],
        kappa=wavetrain.kappa * scale,
        omega=wavetrain.omega / scale,
        delta=wavetrain.delta / model.d_u,
        length_scale=scale,
    )
