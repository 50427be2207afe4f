"""
Closing the loop: do applied setpoints hold up in operation?
============================================================

After an operator accepts a solution, the plant runs near those
setpoints for a window of time and the logged actuals tell us whether
the optimizer's suggestion was really held. Here a simulator stands in
for the plant: each accepted pick gets a window of noisy samples, every
variable gets a confidence interval from its window, and the check is
whether the commanded setpoint sits inside it.
"""
import numpy as np

from plantopt import (
    CobylaSettings,
    HyperParams,
    NoiseModel,
    ObjectiveSpec,
    OptimizationProblem,
    cluster_truth,
    fit_scaler,
    make_cluster_table,
    quantile_solutions,
    restrict_scaler,
    scale,
    simulate_plant,
    solve_batch,
    split,
    tolerance_chain,
    train_gbt,
    verification_compare,
)

table = make_cluster_table(400, seed=0)
schema = table.schema
splits = split(table, 0.8, 0.0, seed=0)
op_names = tuple(schema.operating_names)
scaler = restrict_scaler(fit_scaler(table, splits.train_indices), op_names)
x = scale(table.values[:, : len(op_names)], scaler)
tr = splits.train_indices
te = table.column("TE")
thr = table.column("THR")

hp = HyperParams(n_estimators=80, max_depth=4, eta=0.12)
spec = ObjectiveSpec(
    train_gbt(x[tr], te[tr], hp, feature_names=op_names, target_name="TE"),
    train_gbt(x[tr], thr[tr], hp, feature_names=op_names, target_name="THR"),
    te_norm=(float(te[tr].min()), float(te[tr].max())),
    thr_norm=(float(thr[tr].min()), float(thr[tr].max())),
)
problem = OptimizationProblem(spec, constraints=tolerance_chain(schema, ["A", "B", "C"], 0.1))

# optimize a batch of historical starts and keep the quantile picks
guesses = x[np.random.default_rng(1).choice(tr, size=12, replace=False)]
records = solve_batch(
    problem, guesses, settings=CobylaSettings(rho_beg=0.1, rho_end=1e-3, maxfun=120), scaler=scaler
)
n_infeasible = sum(not r.feasible for r in records)
picks = quantile_solutions(records)
setpoints = np.vstack([pick.x_engineering for pick in picks.picks])
print(f"{len(records)} solutions ({n_infeasible} infeasible); trialing the 6 quantile picks")

# simulate one operating window per pick: 20 samples of sensor noise
ranges = scaler.maximums - scaler.minimums
noise = NoiseModel(operating_sigmas=0.02 * ranges, te_sigma=0.2, thr_sigma=10.0, drift=0.0)
log = simulate_plant(setpoints, noise, cluster_truth(), variable_names=op_names, seed=5)
result = verification_compare(
    picks, log, baseline_te=float(te.mean()), baseline_thr=float(thr.mean())
)

print("\nper-pick verdicts (variables whose setpoint sits inside its window CI):")
for instance in result.instances:
    inside = int(instance.inside_ci.sum())
    verdict = "held" if inside == len(op_names) else f"{inside}/{len(op_names)} held"
    print(
        f"  q{instance.level:<3} actual TE {instance.actual_te:6.2f} "
        f"THR {instance.actual_thr:7.1f}   {verdict}"
    )

first = result.instances[0]
print("\nwindow detail for the first pick:")
for name, sp, lo, hi, ok in zip(
    op_names, first.setpoints, first.ci_low, first.ci_high, first.inside_ci
):
    mark = "inside " if ok else "OUTSIDE"
    print(f"  {name:>4}: setpoint {sp:7.3f}  CI [{lo:7.3f}, {hi:7.3f}]  {mark}")

print(
    f"\nmean TE gain vs pre-optimization baseline: {result.mean_te_gain:+.2f}"
    f"\nmean THR reduction vs baseline:            {result.mean_thr_reduction:+.1f}"
)
