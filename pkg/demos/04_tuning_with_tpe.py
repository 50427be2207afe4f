"""
Hyperparameter search with a tree-structured Parzen estimator
=============================================================

The tuner spends a fixed budget of trials: the first ten sample the
space uniformly, the rest are proposed where good trials concentrate.
Every trial's randomness is derived from (seed, trial index), so the
whole log replays identically on a rerun.
"""
from plantopt import (
    HyperParams,
    SearchDimension,
    SearchSpace,
    fit_scaler,
    make_cluster_table,
    predict_batch,
    regression_metrics,
    restrict_scaler,
    scale,
    split,
    train_gbt,
    tune_tpe,
)

table = make_cluster_table(400, seed=2)
splits = split(table, 0.8, 0.0, seed=0)
op_names = tuple(table.schema.operating_names)
scaler = restrict_scaler(fit_scaler(table, splits.train_indices), op_names)
x = scale(table.values[:, : len(op_names)], scaler)
y = table.column("TE")
tr, te_idx = splits.train_indices, splits.test_indices

# a deliberately small space keeps this demo quick; drop the `space`
# argument to search the stock ranges instead
space = SearchSpace(
    (
        SearchDimension("eta", 0.05, 0.3, log=True),
        SearchDimension("max_depth", 2, 5, integer=True),
        SearchDimension("n_estimators", 40, 120, integer=True),
        SearchDimension("reg_lambda", 0.5, 5.0, log=True),
    )
)

best, trials = tune_tpe(x[tr], y[tr], space=space, budget=14, seed=0)

print("trial log (validation RMSE, * marks the incumbent):")
incumbent = float("inf")
for trial in trials:
    incumbent = min(incumbent, trial.validation_rmse)
    marker = " *" if trial.validation_rmse == incumbent else ""
    p = trial.params
    print(
        f"  {trial.index:2d}: rmse {trial.validation_rmse:6.3f}  "
        f"(eta {p.eta:.3f}, depth {p.max_depth}, trees {p.n_estimators}, "
        f"lambda {p.reg_lambda:.2f}){marker}"
    )

print(f"\nbest: eta {best.eta:.3f}, depth {best.max_depth}, trees {best.n_estimators}")

# compare tuned settings against the stock defaults on held-out rows
for label, hp in (("defaults", HyperParams()), ("tuned", best)):
    model = train_gbt(x[tr], y[tr], hp, feature_names=op_names)
    m = regression_metrics(y[te_idx], predict_batch(model, x[te_idx]))
    print(f"{label:>9}: test R2 {m.r2:.3f}, test RMSE {m.rmse:.3f}")
