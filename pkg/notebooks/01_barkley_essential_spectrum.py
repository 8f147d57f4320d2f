# Essential spectrum of a Barkley wave train and its cusp at gbar = -1.
#
# Pipeline: simulate a pulse train at a comfortable wavenumber, polish it by
# Newton, continue it to the target wavenumber, sample the linearised
# coefficients and trace the Bloch branch through lambda = 0.
import warnings

import numpy as np

from spiralspec import cli, config, cusp, kinetics

warnings.simplefilter("ignore", RuntimeWarning)

cfg = config.parse({"model": {"name": "barkley"}, "gamma_range": [0.0, 60.0], "dgamma": 0.25})
wt = cli.base_wavetrain(cfg)
print("kappa =", wt.kappa, " omega =", wt.omega, " residual =", wt.residual_norm)

coeffs = kinetics.sample_coefficients(kinetics.get_model("barkley"), wt)
exp = cusp.expansion(coeffs, omega0=cfg.omega0_for(0.0))
print("gbar =", exp.gbar, " lambda2 =", exp.lambda2, " lambda3 =", exp.lambda3)

curve = cli.trace_curve(cfg, coeffs)
for g in (0, 5, 10, 20, 40, 60):
    i = np.argmin(np.abs(curve.gamma - g))
    print(f"gamma = {curve.gamma[i]:5.1f}   lambda = {curve.lam[i]:.6f}")

# The tail approaches a copy of the cusp gbar + i n kappa omega.
lam0 = cli.tail_cusp(coeffs, exp, curve)
print("limit point:", lam0)

# lambda3 vanishes for constant g1, so the imaginary deviation is of fifth order.
normalised = curve.__class__(curve.gamma * coeffs.length_scale, curve.lam)
fit = cusp.fit_convergence_orders(normalised, lam0, tuple(cfg.alpha_window))
print("orders: p_real = %.3f  p_imag = %.3f" % (fit.p_real, fit.p_imag))
