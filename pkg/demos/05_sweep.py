# Bounds and shooting speeds over a = 0..40, the data behind a sandwich plot.
# Run: python demos/05_sweep.py > sweep.csv   (about 1 min per b value)

import sys

from frontlab.cli import SweepSpec, run_sweep
from frontlab.core import serialize

spec = SweepSpec((0.0, 40.0, 2.0), (0.0, 5.0, 40.0))
rows = run_sweep(spec, tol=1e-4)
sys.stdout.write(serialize(rows, "csv").decode())

bad = [r for r in rows if r["status"] != "ok"]
print(f"{len(rows)} rows, {len(bad)} not ok", file=sys.stderr)
