# Nonlocal front for (a, b, Lambda) = (1, 1, 2) by truncation and continuation.
# Run: python demos/04_nonlocal.py   (about 20 s)

from frontlab import ModelParams
from frontlab.bounds import theorem3_speed_cap
from frontlab.nonlocal_bvp import SHALLOW_THETAS, continue_theta_alpha, deep_schedule

p = ModelParams(1, 1, 2)
print("speed cap", theorem3_speed_cap(p))

# truncated speeds climb slowly as the cutoff theta shrinks
res = continue_theta_alpha(p, SHALLOW_THETAS, (20.0, 30.0, 40.0), 0.01)
for alpha, theta, sigma in res.table:
    print(f"alpha={alpha:4.0f} theta={theta:<6g} sigma={sigma:.6f}")
print("extrapolated", res.sigma, res.sigma_limit.model)

# pushing theta down to 1e-30 leaves a much smaller extrapolation step
deep = continue_theta_alpha(p, *deep_schedule(p.lam), 0.01)
for alpha, theta, sigma in deep.table[-4:]:
    print(f"alpha={alpha:.1f} theta={theta:<6g} sigma={sigma:.6f}")
print("extrapolated", deep.sigma)

f = deep.final
print("energy", f.energy_lhs, "<=", f.energy_rhs)
for d in f.diagnostics:
    print(f"  {d.name:18s} ok={d.ok}  margin={d.margin:.3g}")
