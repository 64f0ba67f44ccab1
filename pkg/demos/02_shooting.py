# Phase-plane shooting for the local front, Lambda = 0.
# Run: python demos/02_shooting.py

from frontlab import ModelParams, make_grid, sigma_bounds
from frontlab.shooting import classify, profile_from_shot, sigma_star

p = ModelParams(20, 0)

# below sigma* the orbit overshoots phi = 0, above it the orbit lands on the origin
for s in (4.0, 4.2, 4.3, 4.5):
    out = classify(p, s)
    print(f"sigma={s}: {out.kind.name:10s} at t={out.t_event:.3f}")

res = sigma_star(p, tol=1e-6)
sb = sigma_bounds(p)
print("sigma* =", res.sigma_star, "bracket", res.bracket)
print("bounds", sb.lower, sb.upper, "inside:", res.bounds_ok)

# the profile at the fast end of the bracket, sampled on a grid
prof = profile_from_shot(p, res.bracket[1], make_grid(15, 30))
for x, y in zip(prof.xi[::5], prof.phi[::5]):
    print(f"  xi={x:6.1f}  phi={y:.6f}")
