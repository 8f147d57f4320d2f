# Small-alpha expansion on a manufactured coefficient set with closed-form
# quadratures: f2 = cos x, g1 = 1 + sin x, f1 = 0.2 cos x, g2 = -1.
import numpy as np

from spiralspec import cusp, linops
from spiralspec.oracles import manufactured_coefficients

c = manufactured_coefficients(128)
exp = cusp.expansion(c)
print("lambda2 =", exp.lambda2, "(exact 0)   lambda3 =", exp.lambda3, "(exact -1/2)")

# The exact root of the scalar reduction versus the truncated expansion.
alphas = np.geomspace(0.03, 0.15, 7)
err = []
for a in alphas:
    root = linops.find_lambda_root(c, a)
    pred = cusp.predicted_dispersion(exp, a)
    err.append(abs(root - pred))
    print(f"alpha = {a:.3f}   root = {root:.10f}   |root - expansion| = {err[-1]:.2e}")
print("remainder slope:", np.polyfit(np.log(alphas), np.log(err), 1)[0])

# With a little diffusion on the slow component the branch splits off the cusp.
for delta in (1e-2, 1e-3, 1e-4):
    print(f"delta = {delta:g}: alpha* at s = 0.3 is {cusp.alpha_star(0.3, delta):.4f}")
