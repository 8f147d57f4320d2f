# Absolute spectrum: the scalar oracle lambda = nu^2 + 2 nu, then the cusp
# classification for Barkley kinetics.
import warnings

import numpy as np

from spiralspec import absspec, cli, config, cusp, kinetics

warnings.simplefilter("ignore", RuntimeWarning)

op = absspec.SpatialOperator.constant([[0.0]], [1.0], 2.0, kappa=20.0)
branch = absspec.trace_absolute_branch(op, -2.0, (0.0, 6.0), n_points=7)
for p in branch.points:
    print(f"tau = {p.tau:4.1f}   lambda = {p.lam:.8f}   exact = {-1 - (p.tau / 2) ** 2:.8f}")
print("endpoint:", branch.endpoint)

cfg = config.parse({"model": {"name": "barkley"}})
coeffs = kinetics.sample_coefficients(kinetics.get_model("barkley"), cli.base_wavetrain(cfg))
exp = cusp.expansion(coeffs)
print("Barkley lambda3 =", exp.lambda3, "->", absspec.classify_case(exp.lambda3))
spatial = absspec.SpatialOperator.from_coefficients(coeffs)
split = absspec.morse_split(spatial)
print("Morse split:", split)
for lam in (-0.5, -1.0 + 0.0j, -1.05):
    print(f"lambda = {lam}: ordering gap = {absspec.morse_gap(spatial, lam, split):.4f}")
