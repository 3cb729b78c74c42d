"""Mini seed-rate sweep: more seeds help early, barely matter late.

Run:  python3 demos/seed_rate_sweep.py   (takes ~half a minute)
"""

import tempfile

import numpy as np

from vancast.cli import run_sweep
from vancast.config import ExperimentConfig, SweepSpec
from vancast.engine import time_to_fraction

base = ExperimentConfig(
    n_vehicles=400,
    mean_trips=12.0,
    sim_duration=24 * 3600.0,
    dt=1.0,
    replicates=2,
    master_seed=5,
)
spec = SweepSpec("seed_rate", (0.10, 0.03, 0.01))

with tempfile.TemporaryDirectory() as out:
    runs = run_sweep(base, spec, out_dir=out)

print(f"{len(runs)} runs done; milestone hours by seed rate "
      f"(mean of {base.replicates} replicates):\n")
print(f"  {'seeds':>6}  {'t30':>6}  {'t50':>6}  {'t80':>6}")
for rate in spec.values:
    cells = [r for r in runs if r.value == rate]
    cols = []
    for frac in (0.3, 0.5, 0.8):
        hours = [time_to_fraction(r.metrics, frac, r.n_vehicles) for r in cells]
        if any(h is None for h in hours):
            cols.append("     -")
        else:
            cols.append(f"{np.mean(hours) / 3600:6.2f}")
    print(f"  {rate:6.0%}  {'  '.join(cols)}")

print("\nseeding matters most early: t30 moves far more than t80")
