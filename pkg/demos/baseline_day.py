"""One trading day in the default market, step by step.

Draws the packaged endowment profile into a fresh population, runs a single
day, and prints what happened: the morning offer book, a few of the fills,
and the end-of-day metrics.
"""

import numpy as np

from fracmarket import ModelParams, default_profile, generate_population, make_rng, run_day
from fracmarket.metrics import METRIC_FIELDS

params = ModelParams.baseline()
profile = default_profile()

# one seed pins the whole experiment: population draw and trading day
ss = np.random.SeedSequence(42)
gen_ss, day_ss = ss.spawn(2)
population = generate_population(profile, make_rng(gen_ss))
print(f"{len(population)} agents, {sum(a.shares for a in population)} shares outstanding")

trace, day = run_day(population, params, day_ss)

print(f"\nmorning book: {len(trace.offers_entered)} offers")
for o in trace.offers_entered[:5]:
    print(f"  seller {o.seller:4d} asks {o.quantity:3d} @ {o.price:6.2f}")
if len(trace.offers_entered) > 5:
    print(f"  ... and {len(trace.offers_entered) - 5} more")

print(f"\nfills ({len(trace.fills)} total):")
for ev in trace.fills[:5]:
    f = ev.fill
    print(f"  iter {ev.iteration:2d}: buyer {f.buyer:4d} takes {f.units:3d} @ {f.price:6.2f} from {f.seller}")

print("\nend of day:")
for name in METRIC_FIELDS:
    v = getattr(day, name)
    print(f"  {name:18s} {v if v is not None else 'undefined'}")
