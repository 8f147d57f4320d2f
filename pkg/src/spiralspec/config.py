"""Run configuration: strict JSON parsing, validation and hashing."""

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigurationError

MODEL_DEFAULTS = {
    # kappa, (delta, omega0) pairs in the model's original units
    "barkley": {"kappa": 0.6165, "omega0": ((0.0, 2.09), (0.2, 1.87))},
    "karma": {"kappa": 3.258032, "omega0": ((0.0, 51.66), (0.1, 49.81))},
}

SEED_SOURCES = ("simulate", "file")
FRAMES = ("spiral", "wavetrain")


@dataclass
class SeedConfig:
    """How the initial wave train is obtained before continuation to ``kappa``."""

    kappa: float = 0.5
    n: int = 256
    t_end: float = 60.0
    profile_path: str = None
    continuation_factor: float = 1.05


@dataclass
class AbsoluteConfig:
    """Absolute-spectrum tracing controls (all optional)."""

    n_points: int = 40
    tau_range: list = None
    seed_segment: list = None
    region_shape: list = field(default_factory=lambda: [20, 10])
    region_re: list = field(default_factory=lambda: [0.05, 0.9])
    region_im: list = field(default_factory=lambda: [-0.3, 0.3])


@dataclass
class RunConfig:
    model: dict = field(default_factory=lambda: {"name": "barkley", "params": {}})
    kappa: float = None
    delta_list: list = field(default_factory=lambda: [0.0])
    omega0: float = None
    grid_n: int = 256
    gamma_range: list = field(default_factory=lambda: [0.0, 60.0])
    dgamma: float = 0.25
    ell_list: list = field(default_factory=lambda: [0])
    frame: str = "spiral"
    alpha_window: list = field(default_factory=lambda: [0.02, 0.05])
    s0: float = 0.3
    r0: float = 0.1
    output_dir: str = "spiralspec-output"
    seed_source: str = "simulate"
    seed: SeedConfig = field(default_factory=SeedConfig)
    absolute: AbsoluteConfig = field(default_factory=AbsoluteConfig)
    random_seed: int = 0
    n_instances: int = 20

    @property
    def model_name(self):
        return self.model["name"]

    def omega0_for(self, delta):
        """Configured ``omega0``, else the model default nearest in ``delta``."""
        if self.omega0 is not None:
            return float(self.omega0)
        table = MODEL_DEFAULTS.get(self.model_name, {}).get("omega0")
        if not table:
            raise ConfigurationError(f"omega0 required for model {self.model_name!r}")
        return float(min(table, key=lambda p: abs(p[0] - delta))[1])

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def hash(self):
        """SHA-256 of the canonical JSON form (output location excluded)."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where} must be a JSON object")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return cls(**copy.deepcopy(data))


def _number(value, name, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number")
    if positive and not value > 0:
        raise ConfigurationError(f"{name} must be positive")
    if nonneg and value < 0:
        raise ConfigurationError(f"{name} must be nonnegative")
    return float(value)


def _pair(value, name):
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigurationError(f"{name} must be a two-element list")
    return [_number(v, name) for v in value]


def validate(cfg):
    """Check ranges and fill model defaults; returns ``cfg``."""
    if not isinstance(cfg.model, dict) or "name" not in cfg.model:
        raise ConfigurationError("model must be an object with a 'name'")
    extra = set(cfg.model) - {"name", "params", "d_u"}
    if extra:
        raise ConfigurationError(f"unknown key(s) in model: {', '.join(sorted(extra))}")
    cfg.model.setdefault("params", {})
    if cfg.kappa is None:
        if cfg.model_name not in MODEL_DEFAULTS:
            raise ConfigurationError("kappa is required for user-registered models")
        cfg.kappa = MODEL_DEFAULTS[cfg.model_name]["kappa"]
    cfg.kappa = _number(cfg.kappa, "kappa", positive=True)
    if not isinstance(cfg.delta_list, list) or not cfg.delta_list:
        raise ConfigurationError("delta_list must be a nonempty list")
    cfg.delta_list = [_number(d, "delta_list entry", nonneg=True) for d in cfg.delta_list]
    if cfg.omega0 is not None:
        cfg.omega0 = _number(cfg.omega0, "omega0")
    if isinstance(cfg.grid_n, bool) or not isinstance(cfg.grid_n, int) or cfg.grid_n < 64 or cfg.grid_n % 2:
        raise ConfigurationError(f"grid_n must be an even integer >= 64, got {cfg.grid_n!r}")
    cfg.gamma_range = _pair(cfg.gamma_range, "gamma_range")
    cfg.dgamma = _number(cfg.dgamma, "dgamma", positive=True)
    if not isinstance(cfg.ell_list, list) or not all(isinstance(e, int) for e in cfg.ell_list):
        raise ConfigurationError("ell_list must be a list of integers")
    if cfg.frame not in FRAMES:
        raise ConfigurationError(f"frame must be one of {FRAMES}")
    cfg.alpha_window = _pair(cfg.alpha_window, "alpha_window")
    cfg.s0 = _number(cfg.s0, "s0", positive=True)
    cfg.r0 = _number(cfg.r0, "r0", positive=True)
    if not isinstance(cfg.output_dir, str):
        raise ConfigurationError("output_dir must be a string")
    if cfg.seed_source not in SEED_SOURCES:
        raise ConfigurationError(f"seed_source must be one of {SEED_SOURCES}")
    if isinstance(cfg.seed, dict):
        cfg.seed = _build(SeedConfig, cfg.seed, "seed")
    s = cfg.seed
    s.kappa = _number(s.kappa, "seed.kappa", positive=True)
    s.t_end = _number(s.t_end, "seed.t_end", nonneg=True)
    s.continuation_factor = _number(s.continuation_factor, "seed.continuation_factor")
    if s.continuation_factor <= 1:
        raise ConfigurationError("seed.continuation_factor must exceed 1")
    if not isinstance(s.n, int) or s.n < 8 or s.n % 2:
        raise ConfigurationError("seed.n must be an even integer >= 8")
    if cfg.seed_source == "file" and not s.profile_path:
        raise ConfigurationError("seed_source 'file' needs seed.profile_path")
    if isinstance(cfg.absolute, dict):
        cfg.absolute = _build(AbsoluteConfig, cfg.absolute, "absolute")
    a = cfg.absolute
    if not isinstance(a.n_points, int) or a.n_points < 2:
        raise ConfigurationError("absolute.n_points must be an integer >= 2")
    if a.tau_range is not None:
        a.tau_range = _pair(a.tau_range, "absolute.tau_range")
    if a.seed_segment is not None:
        if not (isinstance(a.seed_segment, list) and len(a.seed_segment) == 2):
            raise ConfigurationError("absolute.seed_segment must be [[re, im], [re, im]]")
        a.seed_segment = [_pair(p, "absolute.seed_segment point") for p in a.seed_segment]
    a.region_re = _pair(a.region_re, "absolute.region_re")
    a.region_im = _pair(a.region_im, "absolute.region_im")
    if not (isinstance(a.region_shape, list) and len(a.region_shape) == 2
            and all(isinstance(k, int) and k >= 2 for k in a.region_shape)):
        raise ConfigurationError("absolute.region_shape must be two integers >= 2")
    if not isinstance(cfg.random_seed, int) or isinstance(cfg.random_seed, bool):
        raise ConfigurationError("random_seed must be an integer")
    if not isinstance(cfg.n_instances, int) or cfg.n_instances < 1:
        raise ConfigurationError("n_instances must be a positive integer")
    return cfg


def parse(data):
    """Build a validated :class:`RunConfig` from a JSON-like mapping."""
    cfg = _build(RunConfig, data, "config")
    return validate(cfg)


def load(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}") from None
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse(data)
