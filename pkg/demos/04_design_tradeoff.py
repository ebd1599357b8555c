"""The design trade-off: more aggressive designs (larger lam) reach higher
predicted fitness but get wider confidence sets.

Run: python3 demos/04_design_tradeoff.py   (about a minute)
"""
from fcsconf import TrialConfig, generate_synthetic_landscape, run_trials
from fcsconf.metrics import summarize_sweep, tradeoff_curve

land = generate_synthetic_landscape(10, 2, [0.2, 0.1], noise_sd=0.1, seed=0)
records = []
for lam in (0.0, 1.0, 2.0, 4.0, 6.0):
    records += run_trials(TrialConfig(n=32, lam=lam, trials=150, seed=1), land,
                          methods=["fcs_full", "staircase"])

summaries = summarize_sweep(records, land.fitness_range)
print("method     lam  coverage  mean_pred  mean_width  frac_inf")
for s in summaries:
    print(f"{s.method:<10} {s.lam:>3g}  {s.coverage:8.3f}  {s.mean_predicted:9.3f}  "
          f"{s.mean_width:10.3f}  {s.frac_infinite:8.3f}")

print("\ntrade-off rows for fcs_full (lam, mean prediction, mean width, fraction infinite):")
for row in tradeoff_curve(s for s in summaries if s.method == "fcs_full"):
    print("  " + ", ".join(f"{v:.3f}" for v in row))
