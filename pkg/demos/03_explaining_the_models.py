"""
Ranking what drives the surrogate predictions
=============================================

Exact SHAP values decompose each prediction into per-feature
contributions that sum back to the prediction. Averaging their
magnitudes over an evaluation set gives the percentage ranking an
operator sees. The fast path is cross-checked against a brute-force
Shapley computation on one row.
"""
import numpy as np

from plantopt import (
    HyperParams,
    contribution_percentages,
    fit_scaler,
    make_cluster_table,
    predict,
    restrict_scaler,
    scale,
    shap_base_value,
    shap_brute_force,
    split,
    train_gbt,
    tree_shap,
)

table = make_cluster_table(600, seed=0)
splits = split(table, 0.8, 0.0, seed=0)
op_names = tuple(table.schema.operating_names)
scaler = restrict_scaler(fit_scaler(table, splits.train_indices), op_names)
x = scale(table.values[:, : len(op_names)], scaler)
tr, te_idx = splits.train_indices, splits.test_indices

model = train_gbt(
    x[tr],
    table.column("TE")[tr],
    HyperParams(n_estimators=120, max_depth=4, eta=0.1),
    feature_names=op_names,
    target_name="TE",
)

# one row, decomposed: base value plus contributions equals the prediction
row = x[te_idx][0]
phi = tree_shap(model, row)
base = shap_base_value(model)
print("single-row decomposition (TE):")
for name, value in zip(op_names, phi):
    print(f"  {name:>4}: {value:+8.4f}")
print(f"  base {base:8.4f}  sum {base + phi.sum():8.4f}  prediction {predict(model, row):8.4f}")

# the slow exact route agrees to machine precision
slow = shap_brute_force(model, row)
print(f"max |fast - brute force| on this row: {np.max(np.abs(phi - slow)):.2e}")

# aggregate magnitudes over the held-out rows into a percentage ranking
print("\nmean |SHAP| share over the test split:")
for name, percent in contribution_percentages(model, x[te_idx]):
    bar = "#" * int(round(percent / 2))
    print(f"  {name:>4} {percent:5.1f}%  {bar}")
