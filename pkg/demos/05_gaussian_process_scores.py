"""Gaussian-process predictions are linear in the candidate label.

Retraining a GP with one extra point (x_test, y) moves the posterior mean at
any x along a straight line in y while the variance stays put. That is what
makes full conformal with GP scores affordable.

Run: python3 demos/05_gaussian_process_scores.py
"""
import numpy as np

from fcsconf import Dataset, GpConfig, gp_posterior_linear
from fcsconf.regression import rbf_kernel

rng = np.random.default_rng(0)
data = Dataset(rng.standard_normal((6, 2)), rng.standard_normal(6))
x, x_test = rng.standard_normal(2), rng.standard_normal(2)
a, b, var = gp_posterior_linear(data, x, GpConfig(rbf_kernel(lengthscale=0.8), 0.1), x_test)
print(f"posterior mean at x = {a:.4f} + {b:.4f} * y, variance {var:.4f} for every y")
for y in (-2.0, 0.0, 2.0):
    print(f"  y={y:+.1f}: mean {a + b * y:+.4f}")
