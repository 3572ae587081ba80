"""A desk-scale contamination study.

Runs the Monte Carlo harness over a small factor grid: clean-data
efficiency against the MLE, then error summaries as the contamination
location moves outward.  Reproduces the qualitative signature of the
full study: near-MLE efficiency at the model, bounded errors under
contamination, and outliers losing all influence once far enough.

Run:  python3 demos/04_contamination_grid.py   (about a minute)
"""

from depthwl import (
    EstimatorConfig,
    GridConfig,
    InitSpec,
    efficiency,
    run_grid,
)

estimator = EstimatorConfig()

print("=" * 72)
print("efficiency at the model: MSE(MLE) / MSE(WLE), eps = 0")
print("=" * 72)
eff_cfg = GridConfig(
    dims=(1, 2), size_factors=(5, 10),
    epsilons=(0.0,), mu_cs=(0.0,), sigma_cs=(1.0,),
    reps=100, seed=7, estimator=estimator, init=InitSpec("truth"),
)
for (p, s), ratio in sorted(efficiency(eff_cfg).items()):
    print(f"  p={p} s={s:>2}: efficiency = {ratio:.3f}")
print("  (1.0 means no efficiency is lost by the weighting when the model holds)")

print()
print("=" * 72)
print("20% contamination, p=2, n=50: error vs contamination location")
print("=" * 72)
grid = GridConfig(
    dims=(2,), size_factors=(10,),
    epsilons=(0.2,), mu_cs=(0.0, 1.0, 2.0, 3.0, 5.0, 10.0), sigma_cs=(1.0,),
    reps=100, seed=7, estimator=estimator, init=InitSpec("truth"),
)
report = run_grid(grid)
print(f"  {'mu_c':>5} {'mean MSE':>9} {'mean KL':>9} {'MLE MSE':>9} {'robust-root reps':>17}")
for cell in report.cells:
    print(f"  {cell.mu_c:>5.1f} {cell.mean_mse:>9.4f} {cell.mean_kl:>9.4f} "
          f"{cell.mle_mean_mse:>9.3f} {cell.retrieved:>13}/100")
print()
print("  maxima over contamination placements:")
print("  " + report.maxima_table().replace("\n", "\n  "))
print()
print("the hump sits at intermediate mu_c where contaminants blend into the")
print("clean cloud; by mu_c = 5 they are fully trimmed and the error settles")
print("at the trimmed-fit level no matter how far out they move, while the")
print("MLE deteriorates without bound")
