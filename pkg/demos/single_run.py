"""One dissemination run, narrated: seeds, contacts, completion curve.

Run:  python3 demos/single_run.py
"""

from vancast.config import ExperimentConfig
from vancast.engine import run, time_to_fraction

cfg = ExperimentConfig(
    n_vehicles=300,
    seed_rate=0.05,
    mean_trips=12.0,
    sim_duration=16 * 3600.0,
    dt=1.0,
    master_seed=20,
)
print(f"{cfg.n_vehicles} vehicles, {cfg.seed_rate:.0%} seeded, "
      f"{cfg.n_chunks} chunks of {cfg.symbol_size()} B, "
      f"complete at {cfg.decode_threshold}")

state = run(cfg)
print(f"seeds were {state.seeds}")
print(f"{state.completed_count}/{cfg.n_vehicles} vehicles completed "
      f"within {cfg.sim_duration / 3600:.0f} h\n")

# Completion fraction by hour, as a crude bar chart.
samples = dict(state.metrics.samples)
for hour in range(0, 17, 2):
    count = samples.get(float(hour * 3600), state.completed_count)
    frac = count / cfg.n_vehicles
    print(f"  {hour:2d} h  {'#' * round(40 * frac):<40}  {frac:6.1%}")

print()
for frac in (0.3, 0.5, 0.8):
    t = time_to_fraction(state.metrics, frac, cfg.n_vehicles)
    when = "never" if t is None else f"{t / 3600:.2f} h"
    print(f"  time to {frac:.0%}: {when}")
