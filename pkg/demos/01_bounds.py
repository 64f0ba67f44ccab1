# Closed-form bounds on the local critical speed.
# Run: python demos/01_bounds.py

import math

from frontlab import ModelParams, a_star, sigma_bounds

# the breakpoint between the parabola and Fisher branches
r = a_star()
print("a* =", r.value, " residual", r.residual)

# a few points from each regime
for a, b in [(1, 1), (4, 0), (12, 0), (25, 0), (20, 0), (0, 40), (40, 40)]:
    sb = sigma_bounds(ModelParams(a, b))
    print(f"a={a:5.1f} b={b:5.1f}  {sb.lower:.6f} <= sigma* <= {sb.upper:.6f}"
          f"   ({sb.lower_branch}, {sb.upper_branch})")

# both upper branches meet at a*
a = r.value
print("gap at a*:", math.sqrt((a * a + 4) / a) - (2 + a / 8))
