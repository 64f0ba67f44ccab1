# The screened-Poisson potential u - Lambda^2 u'' = a phi^2.
# Run: python demos/03_helmholtz.py

import numpy as np

from frontlab import ModelParams, make_grid
from frontlab.core import WaveProfile
from frontlab.helmholtz import KernelSpec, convolve_extended, potential_from_profile, velocity

# manufactured solution: u = exp(-x^2) has a known right-hand side
lam = 1.0
for n in (400, 800, 1600):
    g = make_grid(8, n)
    x = g.xi
    u = np.exp(-x * x)
    f = convolve_extended(KernelSpec(lam), g, u - lam ** 2 * (4 * x * x - 2) * u, 0.0, 0.0)
    print(f"h={g.h:.3f}  max error {np.abs(f.u - u).max():.3e}")

# potential of a tanh front, and the bounds it must respect
g = make_grid(20, 4000)
prof = WaveProfile(g, 0.5 * (1 - np.tanh(g.xi / 2)), 2.0)
field = potential_from_profile(ModelParams(1, 1, 2), prof)
for name, value, bound, margin in field.diagnostics:
    print(f"{name:14s} {value:.5f} <= {bound:.5f}  margin {margin:.4f}")
print("velocity range", velocity(field).min(), velocity(field).max())
