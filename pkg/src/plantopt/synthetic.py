"""Synthetic dataset generators used by tests, demos, and desk-scale studies."""
from __future__ import annotations

import numpy as np

from .data import OPERATING, PERFORMANCE, DataTable, FeatureSchema, VariableDef
from .errors import ValidationError


def make_friedman1(
    n_rows: int = 1000, noise: float = 1.0, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Friedman's first regression benchmark.

    Ten uniform features on [0, 1]; only the first five matter:
    y = 10 sin(pi x0 x1) + 20 (x2 - 0.5)^2 + 10 x3 + 5 x4 + noise * N(0, 1).
    """
    if n_rows < 2:
        raise ValidationError("need at least 2 rows")
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(n_rows, 10))
    y = (
        10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
        + 20.0 * (x[:, 2] - 0.5) ** 2
        + 10.0 * x[:, 3]
        + 5.0 * x[:, 4]
        + noise * rng.normal(size=n_rows)
    )
    return x, y


def cluster_schema() -> FeatureSchema:
    """Six abstract operating variables, the first three forming a cluster."""
    operating = tuple(
        VariableDef(name, "unitless", OPERATING, f"Setpoint {name}")
        for name in ("A", "B", "C", "D", "E", "F")
    )
    performance = (
        VariableDef("TE", "%", PERFORMANCE, "Thermal efficiency"),
        VariableDef("THR", "kJ/kWh", PERFORMANCE, "Turbine heat rate"),
    )
    return FeatureSchema(operating + performance)


def cluster_truth():
    """Ground-truth (te, thr) functions over the six cluster variables.

    Efficiency rewards separating A from B while heat rate penalizes the
    same gap with an equal-and-opposite pull, so the direction that slides
    the whole cluster together is flat and only the A-B split matters.
    """

    def te(x):
        x = np.asarray(x, dtype=float)
        return 38.0 + 4.0 * (x[..., 0] - x[..., 1]) + 1.5 * x[..., 3]

    def thr(x):
        x = np.asarray(x, dtype=float)
        return 8200.0 + 450.0 * (x[..., 1] - x[..., 0]) + 120.0 * x[..., 4]

    return te, thr


def make_cluster_table(n_rows: int = 600, seed: int = 0, rho: float = 0.95) -> DataTable:
    """Synthetic table with one correlated operating cluster (A, B, C).

    The cluster shares a uniform latent driver plus just enough independent
    noise to land near the requested pairwise correlation; D, E, F are
    independent. TE and THR follow `cluster_truth` plus measurement noise.
    """
    if n_rows < 10:
        raise ValidationError("need at least 10 rows")
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must be in (0, 1)")
    rng = np.random.default_rng(seed)
    latent = rng.uniform(0.0, 1.0, n_rows)
    # corr(z + e, z + e') = var(z) / (var(z) + sigma^2) for independent e, e'
    sigma = np.sqrt((1.0 / 12.0) * (1.0 / rho - 1.0))
    cluster = latent[:, None] + rng.normal(0.0, sigma, (n_rows, 3))
    others = rng.uniform(0.0, 1.0, (n_rows, 3))
    operating = np.column_stack([cluster, others])
    te_fn, thr_fn = cluster_truth()
    te = te_fn(operating) + rng.normal(0.0, 0.3, n_rows)
    thr = thr_fn(operating) + rng.normal(0.0, 25.0, n_rows)
    values = np.column_stack([operating, te, thr])
    return DataTable(cluster_schema(), values, provenance=f"synthetic-cluster-seed{seed}")


def plant_truth():
    """Ground-truth (te, thr) functions over the nine plant variables.

    Main steam pressure dominates efficiency, feedwater and reheat
    temperatures help, condenser pressure hurts, and heat rate follows the
    3600/efficiency identity plus a mild steam-flow penalty.
    """

    def te(x):
        x = np.asarray(x, dtype=float)
        msp, mst, fwt, rht, cv = x[..., 2], x[..., 3], x[..., 5], x[..., 6], x[..., 7]
        return (
            30.0
            + 0.9 * (msp - 12.0)
            + 0.02 * (mst - 530.0)
            + 0.012 * (fwt - 230.0)
            + 0.01 * (rht - 530.0)
            - 0.35 * (cv - 4.0)
        )

    def thr(x):
        x = np.asarray(x, dtype=float)
        msf = x[..., 4]
        return 360000.0 / te(x) + 0.35 * (msf - 900.0)

    return te, thr


def make_plant_table(n_rows: int = 1200, seed: int = 0) -> DataTable:
    """Plant-like synthetic table over the nine-variable schema.

    A load latent drives the coal, air, and steam flows and the power output
    (a strongly correlated cluster); the remaining variables move on their
    own. Performance columns follow `plant_truth` plus measurement noise.
    """
    from .data import plant_schema

    if n_rows < 10:
        raise ValidationError("need at least 10 rows")
    rng = np.random.default_rng(seed)
    load = rng.uniform(0.0, 1.0, n_rows)

    def around(base, span, coupling, noise_scale):
        return base + span * coupling * load + span * noise_scale * rng.normal(size=n_rows)

    cfr = around(140.0, 80.0, 1.0, 0.05)
    taf = around(900.0, 500.0, 1.0, 0.05)
    msp = around(12.0, 5.0, 0.3, 0.25)
    mst = around(530.0, 15.0, 0.2, 0.30)
    msf = around(900.0, 400.0, 1.0, 0.05)
    fwt = around(230.0, 30.0, 0.3, 0.30)
    rht = around(530.0, 15.0, 0.2, 0.30)
    cv = around(4.0, 5.0, 0.2, 0.35)
    power = around(250.0, 100.0, 1.0, 0.04)
    operating = np.column_stack([cfr, taf, msp, mst, msf, fwt, rht, cv, power])
    te_fn, thr_fn = plant_truth()
    te = te_fn(operating) + rng.normal(0.0, 0.15, n_rows)
    thr = thr_fn(operating) + rng.normal(0.0, 30.0, n_rows)
    values = np.column_stack([operating, te, thr])
    return DataTable(plant_schema(), values, provenance=f"synthetic-plant-seed{seed}")
