"""
Training efficiency and heat-rate surrogates with honest intervals
==================================================================

Two boosted-tree models stand in for the plant: one predicts thermal
efficiency (TE, higher is better), the other turbine heat rate (THR,
lower is better). A held-out calibration split turns point predictions
into distribution-free intervals via split conformal prediction.
"""
import numpy as np

from plantopt import (
    HyperParams,
    calibrate,
    fit_scaler,
    make_cluster_table,
    predict_interval_batch,
    regression_metrics,
    predict_batch,
    restrict_scaler,
    scale,
    split,
    train_gbt,
)

table = make_cluster_table(600, seed=0)
splits = split(table, train_fraction=0.64, calibration_fraction=0.16, seed=0)
print(
    f"rows: {splits.train_indices.size} train, "
    f"{splits.calibration_indices.size} calibration, {splits.test_indices.size} test"
)

# scale operating variables to [0, 1] using training rows only
op_names = tuple(table.schema.operating_names)
scaler = restrict_scaler(fit_scaler(table, splits.train_indices), op_names)
x = scale(table.values[:, : len(op_names)], scaler)
tr, cal, te_idx = splits.train_indices, splits.calibration_indices, splits.test_indices

hp = HyperParams(n_estimators=150, max_depth=4, eta=0.1)
print(f"hyperparameters: {hp.n_estimators} trees, depth {hp.max_depth}, eta {hp.eta}")

for target in ("TE", "THR"):
    y = table.column(target)
    model = train_gbt(x[tr], y[tr], hp, feature_names=op_names, target_name=target)

    # training loss is monotone; show the first and last few values
    rmse_path = model.train_rmse
    print(f"\n{target}: train RMSE path {rmse_path[0]:.3f} -> {rmse_path[-1]:.3f}")
    m_train = regression_metrics(y[tr], predict_batch(model, x[tr]))
    m_test = regression_metrics(y[te_idx], predict_batch(model, x[te_idx]))
    print(f"{target}: train R2 {m_train.r2:.3f}  test R2 {m_test.r2:.3f}  test RMSE {m_test.rmse:.3f}")

    # conformal intervals: one calibrated half-width shared by every point
    calibration = calibrate(model, x[cal], y[cal], alpha=0.05)
    intervals = predict_interval_batch(model, calibration, x[te_idx])
    covered = (y[te_idx] >= intervals[:, 0]) & (y[te_idx] <= intervals[:, 1])
    print(
        f"{target}: 95% interval half-width {calibration.q_hat:.3f}, "
        f"held-out coverage {covered.mean():.3f}"
    )

    sample = np.argsort(y[te_idx])[:: max(1, te_idx.size // 4)][:4]
    for i in sample:
        lo, hi = intervals[i]
        print(f"    y={y[te_idx][i]:9.3f}   predicted [{lo:9.3f}, {hi:9.3f}]")
