"""
Sweeping the operator tolerance and scoring domain consistency
==============================================================

The optimizer maximizes a blend of predicted efficiency and heat rate
over the scaled operating box. Left alone it happily tears correlated
variables apart, proposing setpoints the plant has never run. A
tolerance chain |x_i - x_j| <= tau over the correlated cluster keeps
solutions inside familiar territory, and the two-sample Cramer-von
Mises statistic between partner variables quantifies how familiar they
are: small means the optimized values still move together like the
historical data.
"""
import numpy as np

from plantopt import (
    CobylaSettings,
    HyperParams,
    ObjectiveSpec,
    OptimizationProblem,
    fit_scaler,
    make_cluster_table,
    restrict_scaler,
    scale,
    split,
    sweep,
    tolerance_chain,
    train_gbt,
)

table = make_cluster_table(400, seed=0)
schema = table.schema
splits = split(table, 0.8, 0.0, seed=0)
op_names = tuple(schema.operating_names)
scaler = restrict_scaler(fit_scaler(table, splits.train_indices), op_names)
x = scale(table.values[:, : len(op_names)], scaler)
tr = splits.train_indices

hp = HyperParams(n_estimators=80, max_depth=4, eta=0.12)
te = table.column("TE")
thr = table.column("THR")
te_model = train_gbt(x[tr], te[tr], hp, feature_names=op_names, target_name="TE")
thr_model = train_gbt(x[tr], thr[tr], hp, feature_names=op_names, target_name="THR")

# both objectives are normalized by their training spread before blending
spec = ObjectiveSpec(
    te_model,
    thr_model,
    te_norm=(float(te[tr].min()), float(te[tr].max())),
    thr_norm=(float(thr[tr].min()), float(thr[tr].max())),
)
problem = OptimizationProblem(spec, constraints=tolerance_chain(schema, ["A", "B", "C"], 0.05))

# each tau re-solves the same batch of historical starting points
guesses = x[np.random.default_rng(1).choice(tr, size=12, replace=False)]
report = sweep(
    problem,
    taus=[0.05, 0.30],
    initial_guesses=guesses,
    settings=CobylaSettings(rho_beg=0.1, rho_end=1e-3, maxfun=120),
    parallelism=2,
    scaler=scaler,
)

print("pair similarity (CvM, smaller = closer to how the plant already runs):")
print(f"  {'configuration':>16}" + "".join(f"{pair:>10}" for pair in report.baseline))
print(
    f"  {'data baseline':>16}"
    + "".join(f"{value:10.3f}" for value in report.baseline.values())
)
for entry in (*report.entries, report.unconstrained):
    row = "".join(f"{entry.cvm_by_pair[pair]:10.3f}" for pair in report.baseline)
    feasible = sum(r.feasible for r in entry.records)
    print(f"  {entry.label:>16}{row}   ({feasible}/{len(entry.records)} feasible)")

# representative solutions at fixed objective quantiles, tau = 0.05
entry = report.entries[0]
print(f"\nquantile picks at {entry.label} (engineering units):")
header = "".join(f"{name:>9}" for name in op_names)
print(f"  level{header}   objective")
for level, pick in zip(entry.quantiles.levels, entry.quantiles.picks):
    row = "".join(f"{v:9.3f}" for v in pick.x_engineering)
    print(f"  {level:>5}{row}   {pick.objective_value:9.4f}")

print(
    "\nreading: tighter tau keeps partner variables distributed like the"
    "\nhistorical data (CvM near baseline); unconstrained optimization"
    "\ndrifts far outside it."
)
