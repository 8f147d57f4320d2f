"""Command-line interface: ``spiralspec <subcommand> --config run.json``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O
error. Errors are reported as one JSON object on stderr.
"""

import os

# BLAS thread caps must be set before numpy is loaded
_THREADS = os.environ.get("SPIRALSPEC_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import sys  # noqa: E402
import warnings  # noqa: E402
from dataclasses import replace  # noqa: E402

import numpy as np  # noqa: E402

from . import absspec, blochspec, config, cusp, oracles, wavetrain  # noqa: E402
from .emit import Emitter  # noqa: E402
from .errors import (  # noqa: E402
    ConfigurationError,
    OutputError,
    SpiralSpecError,
)
from .kinetics import get_model, sample_coefficients  # noqa: E402

log = logging.getLogger("spiralspec")

SUBCOMMANDS = ("wavetrain", "essential", "cusp", "sweep", "absolute", "operators-test",
               "reproduce")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

RECIPES = {
    "fig-bd": ("essential", {"model": {"name": "barkley"}, "delta_list": [0.0, 0.2],
                             "ell_list": [-1, 0, 1], "gamma_range": [0.0, 60.0], "dgamma": 0.25}),
    "fig-5": ("sweep", {"model": {"name": "barkley"},
                        "delta_list": [0.0, 0.05, 0.1, 0.15, 0.2],
                        "gamma_range": [0.0, 60.0], "dgamma": 0.25}),
    "fig-8": ("cusp", {"model": {"name": "barkley"}, "delta_list": [0.0],
                       "gamma_range": [0.0, 60.0], "dgamma": 0.25}),
    "fig-6": ("essential", {"model": {"name": "karma"}, "delta_list": [0.0, 0.1],
                            "ell_list": [-1, 0, 1], "gamma_range": [0.0, 140.0], "dgamma": 0.5}),
    "fig-7": ("essential", {"model": {"name": "karma"}, "delta_list": [0.0],
                            "ell_list": [-2, -1, 0, 1, 2], "gamma_range": [0.0, 140.0],
                            "dgamma": 0.5}),
    "fig-10": ("essential", {"model": {"name": "barkley"}, "frame": "wavetrain",
                             "delta_list": [0.2, 0.1, 0.05, 0.02], "gamma_range": [0.0, 20.0],
                             "dgamma": 0.1}),
}


# ---------------------------------------------------------------- pipeline


def build_model(cfg, delta=0.0):
    m = cfg.model
    return get_model(m["name"], m.get("params"), m.get("d_u"), delta=delta)


def base_wavetrain(cfg):
    """The ``delta = 0`` wave train at ``cfg.kappa`` on ``cfg.grid_n`` points.

    The seed is simulated (or read from a profile CSV) at ``seed.kappa``,
    Newton-converged there and continued in the wavenumber.
    """
    model = build_model(cfg)
    s = cfg.seed
    if cfg.seed_source == "file":
        try:
            profile = wavetrain.load_profile_csv(s.profile_path)
        except OSError as exc:
            raise ConfigurationError(f"cannot read seed profile: {exc}") from None
    else:
        profile = wavetrain.simulate_seed(model, s.kappa, n=s.n, t_end=s.t_end)
    wt = wavetrain.solve(model, profile.kappa, profile)
    return wavetrain.continue_in_kappa(model, wt, cfg.kappa, n=cfg.grid_n,
                                       factor=s.continuation_factor)


def wavetrain_family(cfg, deltas=None):
    """Wave trains for ``deltas`` (default ``cfg.delta_list``), keyed by delta."""
    deltas = cfg.delta_list if deltas is None else deltas
    base = base_wavetrain(cfg)
    out = {0.0: base}
    positive = sorted(d for d in set(deltas) if d > 0)
    if positive:
        family = wavetrain.continue_in_delta(build_model(cfg), base, positive, max_step=0.02)
        out.update({d: w for d, w in zip(positive, family)})
    return {d: out[d] for d in deltas}


def coefficients(cfg, wt):
    return sample_coefficients(build_model(cfg, wt.delta), wt)


def trace_curve(cfg, coeffs):
    """Trace the branch through ``lambda = 0`` (spiral or wave-train frame).

    ``gamma_range`` and ``dgamma`` are in the model's original length units.
    """
    ls = coeffs.length_scale
    lo, hi = (g * ls for g in cfg.gamma_range)
    dg = cfg.dgamma * ls
    if cfg.frame == "wavetrain":
        curve = blochspec.wavetrain_frame_curve(coeffs, (lo, hi), dg, method="local")
    else:
        start = 0.0 if lo == 0 else blochspec.nearest_eigenvalue(coeffs, lo, coeffs.gbar)
        curve = blochspec.trace_branch(coeffs, start, (lo, hi), dg, method="local")
    return replace(curve, gamma=curve.gamma / ls)


def _copies(cfg, curve, delta):
    if cfg.frame == "wavetrain":
        return [curve]
    omega0 = cfg.omega0_for(delta)
    return [blochspec.to_spiral_frame(curve, omega0, ell) for ell in cfg.ell_list]


def _tag(delta):
    return f"{delta:.6g}".replace(".", "p")


# ---------------------------------------------------------------- subcommands


def cmd_wavetrain(cfg, em):
    family = wavetrain_family(cfg)
    rows = []
    for delta, wt in family.items():
        em.profile(f"profile_delta{_tag(delta)}.csv", wt)
        rows.append({"delta": delta, "kappa": wt.kappa, "omega": wt.omega, "n": wt.n,
                     "residual_norm": wt.residual_norm})
    em.report("wavetrain.json", {"model": cfg.model_name, "wavetrains": rows})


def cmd_essential(cfg, em):
    for delta, wt in wavetrain_family(cfg).items():
        curve = trace_curve(cfg, coefficients(cfg, wt))
        for c in _copies(cfg, curve, delta):
            em.curve(f"curve_delta{_tag(delta)}_ell{c.ell:+d}_{c.frame}.csv", c)


def cmd_sweep(cfg, em):
    family = wavetrain_family(cfg)
    curves = {}
    for delta, wt in family.items():
        curves[delta] = trace_curve(cfg, coefficients(cfg, wt))
        em.curve(f"sweep_delta{_tag(delta)}.csv", curves[delta])
    gbar = coefficients(cfg, family[cfg.delta_list[0]]).gbar
    rows = []
    ref = curves.get(0.0)
    for delta, c in curves.items():
        row = {"delta": delta, "omega": family[delta].omega, "n_points": len(c)}
        if ref is not None and delta > 0:
            near = c.lam[np.abs(c.lam - gbar) < 1.0]
            ref_near = ref.lam[np.abs(ref.lam - gbar) < 1.0]
            if len(near) and len(ref_near):
                row["distance_to_delta0_near_gbar"] = blochspec.set_distance(near, ref_near)
        rows.append(row)
    em.report("sweep.json", {"model": cfg.model_name, "gbar": gbar, "members": rows})


def cmd_cusp(cfg, em):
    wt = wavetrain_family(cfg, [0.0])[0.0]
    coeffs = coefficients(cfg, wt)
    exp = cusp.expansion(coeffs, omega0=cfg.omega0_for(0.0))
    curve = trace_curve(cfg, coeffs)
    em.curve("curve_delta0_ell+0_spiral.csv", curve)
    # the fit works in the normalised alpha of the coefficients
    normalised = replace(curve, gamma=curve.gamma * coeffs.length_scale)
    lam0 = tail_cusp(coeffs, exp, curve)
    fit = cusp.fit_convergence_orders(normalised, lam0, tuple(cfg.alpha_window))
    report = {
        "model": cfg.model_name,
        "expansion": exp.as_dict(),
        "case": absspec.classify_case(exp.lambda3),
        "cusp_points": cusp.cusp_points(exp, range(-2, 3)),
        "fit_lambda0": lam0,
        "fit": {**fit.as_dict(), "c2": fit.c2, "c3": fit.c3, "n_points": fit.n_points},
        "alpha_window": cfg.alpha_window,
        "length_scale": coeffs.length_scale,
    }
    em.report("cusp.json", report)


def tail_cusp(coeffs, exp, curve):
    """The cusp ``gbar + i n kappa omega`` nearest the end of a traced branch.

    Copies of one spiral-frame branch are spaced by the wave-train frequency
    ``kappa omega`` (in normalised units), so that spacing locates the limit.
    """
    spacing = coeffs.kappa * coeffs.omega
    n = int(np.rint((curve.lam[-1].imag) / spacing))
    return complex(exp.gbar, n * spacing)


def _default_case1_taus(exp, r0):
    root = 2.0 * np.sqrt(-exp.lambda2)
    return [root / (0.3 * r0), root / (5.0 * r0)]


def cmd_absolute(cfg, em):
    wt = wavetrain_family(cfg, [0.0])[0.0]
    coeffs = coefficients(cfg, wt)
    exp = cusp.expansion(coeffs, omega0=cfg.omega0_for(0.0))
    case = absspec.classify_case(exp.lambda3)
    op = absspec.SpatialOperator.from_coefficients(coeffs)
    split = absspec.morse_split(op)
    a = cfg.absolute
    lam0 = complex(exp.gbar)
    r0 = cfg.r0
    if case == "case1":
        seed = lam0 - r0**2
        nu1, nu2, _ = absspec.newton_polygon_roots(seed - lam0, exp.lambda2, exp.lambda3)
        pair = (nu1, nu2) if nu1.imag > nu2.imag else (nu2, nu1)
        taus = a.tau_range or _default_case1_taus(exp, r0)
        branch = absspec.trace_absolute_branch(op, seed, taus, a.n_points, nu_pair=pair,
                                               case_tag=case)
        seed_gap = 0.0
    else:
        seg = a.seed_segment or [[lam0.real - 1.2 * r0, 2 * r0], [lam0.real - 0.8 * r0, 2 * r0]]
        seed, seed_gap = absspec.find_absolute_seed(op, complex(*seg[0]), complex(*seg[1]), split)
        nu_l, nu_r = absspec.split_pair(op, seed, split)
        tau0 = nu_l.imag - nu_r.imag
        taus = a.tau_range or [3.0 * tau0, tau0 / 4.0]
        branch = absspec.trace_absolute_branch(op, seed, taus, a.n_points, split=split,
                                               seed_tol=0.05, case_tag=case)
    em.branch("absolute_branch.csv", branch)
    region = absspec.sample_region(op, lam0, tuple(a.region_re), tuple(a.region_im),
                                   tuple(a.region_shape), split=split)
    lam = branch.lam
    right = lam[lam.real > lam0.real]
    near = np.abs(lam - lam0) < 0.05
    report = {
        "model": cfg.model_name,
        "case": case,
        "lambda0": lam0,
        "expansion": exp.as_dict(),
        "morse_split": split,
        "seed": {"lambda": complex(seed), "gap": float(seed_gap)},
        "branch": {
            "n_points": len(branch.points),
            "endpoint": branch.endpoint,
            "max_abs_im_near_lambda0": float(np.max(np.abs(lam[near].imag))) if near.any() else None,
            "min_re": float(lam.real.min()),
            "max_re": float(lam.real.max()),
            "points_right_of_lambda0": int(len(right)),
            "ordering_gap_max": max(absspec.morse_gap(op, p.lam, split) for p in branch.points),
        },
        "region": {
            "n_grid": int(region.grid.size),
            "n_in_region": int(region.points.size),
            "reference_count": region.reference_count,
            "min_gap": float(region.gaps.min()) if region.gaps.size else None,
            "zero_gap_points": int(np.sum(region.gaps < 1e-8)),
        },
    }
    em.report("absolute.json", report)


def cmd_operators_test(cfg, em):
    checks = oracles.run_suite(cfg.random_seed, cfg.n_instances)
    body = {"random_seed": cfg.random_seed, "n_instances": cfg.n_instances,
            "all_passed": all(c.passed for c in checks),
            "checks": [c.as_dict() for c in checks]}
    em.report("operators_test.json", body)
    return EXIT_OK if body["all_passed"] else EXIT_NUMERICAL


HANDLERS = {
    "wavetrain": cmd_wavetrain,
    "essential": cmd_essential,
    "sweep": cmd_sweep,
    "cusp": cmd_cusp,
    "absolute": cmd_absolute,
    "operators-test": cmd_operators_test,
}


# ---------------------------------------------------------------- entry points


def _load_config(path, overrides):
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON in {path}: {exc}") from None
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
    return {**overrides, **data}


def run(subcommand, config_path=None, output=None, grid_n=None, figure=None):
    """Run one subcommand; returns the exit status. Raises library errors."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    defaults = {}
    if subcommand == "reproduce":
        if figure not in RECIPES:
            raise ConfigurationError(f"unknown figure {figure!r}; choose from {sorted(RECIPES)}")
        subcommand, defaults = RECIPES[figure]
    elif config_path is None:
        raise ConfigurationError("--config is required")
    data = _load_config(config_path, defaults)
    if grid_n is not None:
        data["grid_n"] = grid_n
    if output is not None:
        data["output_dir"] = output
    cfg = config.parse(data)
    em = Emitter(cfg.output_dir, cfg.hash())
    status = HANDLERS[subcommand](cfg, em) or EXIT_OK
    # the output location is not part of the run identity (nor of its hash)
    em.report("config.json", {k: v for k, v in cfg.to_dict().items() if k != "output_dir"})
    em.manifest(subcommand if figure is None else f"reproduce {figure}")
    return status


def _parser():
    p = argparse.ArgumentParser(prog="spiralspec", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("figure", nargs="?", help="figure id for 'reproduce'")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--output", help="output directory (overrides output_dir)")
    p.add_argument("--grid-n", type=int, help="Fourier grid size (overrides grid_n)")
    p.add_argument("--log-level", default="WARNING")
    return p


def _error(exc, code):
    body = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(body, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.subcommand != "reproduce" and args.figure is not None:
        return _error(ConfigurationError(f"unexpected argument {args.figure!r}"), EXIT_CONFIG)
    with warnings.catch_warnings():
        if logging.getLogger().level > logging.WARNING:
            warnings.simplefilter("ignore")
        try:
            return run(args.subcommand, args.config, args.output, args.grid_n, args.figure)
        except ConfigurationError as exc:
            return _error(exc, EXIT_CONFIG)
        except OutputError as exc:
            return _error(exc, EXIT_IO)
        except (SpiralSpecError, np.linalg.LinAlgError, FloatingPointError) as exc:
            return _error(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
