"""How the liquidity ratio responds to one parameter at a time.

Two sweeps: the sell-side activation probability (more offers chasing the
same buyers dilutes the ratio) and the midpoint of the valuation envelope
(pricier offers get accepted less). Results land in sweep_*.csv next to
this script.
"""

from pathlib import Path

from fracmarket import ModelParams, SweepSpec, default_profile, run_sweep, write_sweep_csv

HERE = Path(__file__).parent
REPS = 200  # the shipped sensitivity results use 1000
profile = default_profile()

for parameter, values in (
    ("ps_offer_prob", (0.05, 0.114, 0.2, 0.3)),
    ("market_midpoint", (0.85, 0.925, 1.0)),
):
    spec = SweepSpec(parameter, values, reps=REPS, master_seed=11,
                     base_params=ModelParams.baseline())
    results = run_sweep(spec, profile)
    print(f"\n{parameter}:")
    for value, agg in results:
        print(f"  {value:>7}: liquidity ratio {agg.mean('liquidity_ratio'):.4f}, "
              f"{agg.mean('n_offers'):.1f} offers, {agg.mean('n_trades'):.1f} trades")
    out = HERE / f"sweep_{parameter}.csv"
    write_sweep_csv(results, out)
    print(f"  -> {out}")
