"""Surrogate-model-driven setpoint optimization for thermal power plants.

The package splits into data handling (schemas, ingestion, scaling,
splits), surrogate modeling (boosted trees, conformal intervals, SHAP
attributions, TPE tuning), constrained optimization (a derivative-free
trust-region solver plus the tolerance-chain problem builder), evaluation
(tau sweeps, similarity scoring, quantile picks, simulated verification),
and fleet carbon accounting. The command line lives in plantopt.cli and
the HTTP service in plantopt.service.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .carbon import (
    CarbonReport,
    FleetFile,
    FleetPlant,
    PlantReduction,
    fleet_report,
    lifetime_reduction,
    load_fleet,
)
from .cobyla import CobylaResult, CobylaSettings, cobyla_minimize
from .conformal import (
    ConformalCalibration,
    calibrate,
    calibration_from_scores,
    predict_interval,
    predict_interval_batch,
)
from .data import (
    DataSplits,
    DataTable,
    FeatureSchema,
    ScalingParams,
    VariableDef,
    fit_scaler,
    ingest_csv,
    inverse_scale,
    plant_schema,
    restrict_scaler,
    scale,
    split,
)
from .errors import (
    DataParseError,
    PlantOptError,
    SchemaError,
    SolverError,
    ValidationError,
)
from .evaluate import (
    QUANTILE_LEVELS,
    ActualLog,
    NoiseModel,
    QuantilePicks,
    SweepEntry,
    SweepReport,
    VerificationReport,
    quantile_solutions,
    simulate_plant,
    sweep,
    verification_compare,
)
from .explain import (
    ShapReport,
    build_shap_report,
    contribution_percentages,
    shap_base_value,
    shap_brute_force,
    tree_shap,
    tree_shap_batch,
)
from .gbt import (
    GbtModel,
    HyperParams,
    RegressionMetrics,
    model_from_dict,
    model_to_dict,
    predict,
    predict_batch,
    r_squared,
    regression_metrics,
    rmse,
    train_gbt,
)
from .optimize import (
    ObjectiveSpec,
    OptimizationProblem,
    SolutionRecord,
    ToleranceConstraintSet,
    scalarized_objective,
    solve_batch,
    tolerance_chain,
)
from .stats import (
    CorrelationReport,
    EcdfCurve,
    KdeCurve,
    SimilarityValue,
    correlation_matrix,
    cvm_two_sample,
    ecdf,
    kde,
    pearson,
    silverman_bandwidth,
)
from .synthetic import (
    cluster_schema,
    cluster_truth,
    make_cluster_table,
    make_friedman1,
    make_plant_table,
    plant_truth,
)
from .tuning import SearchDimension, SearchSpace, Trial, default_search_space, tune_tpe

__all__ = [
    "ActualLog",
    "CarbonReport",
    "CobylaResult",
    "CobylaSettings",
    "ConformalCalibration",
    "CorrelationReport",
    "DataParseError",
    "DataSplits",
    "DataTable",
    "EcdfCurve",
    "FeatureSchema",
    "FleetFile",
    "FleetPlant",
    "GbtModel",
    "HyperParams",
    "KdeCurve",
    "NoiseModel",
    "ObjectiveSpec",
    "OptimizationProblem",
    "PlantOptError",
    "PlantReduction",
    "QUANTILE_LEVELS",
    "QuantilePicks",
    "RegressionMetrics",
    "ScalingParams",
    "SchemaError",
    "SearchDimension",
    "SearchSpace",
    "ShapReport",
    "SimilarityValue",
    "SolutionRecord",
    "SolverError",
    "SweepEntry",
    "SweepReport",
    "ToleranceConstraintSet",
    "Trial",
    "ValidationError",
    "VariableDef",
    "VerificationReport",
    "__version__",
    "build_shap_report",
    "calibrate",
    "calibration_from_scores",
    "cluster_schema",
    "cluster_truth",
    "cobyla_minimize",
    "contribution_percentages",
    "correlation_matrix",
    "cvm_two_sample",
    "default_search_space",
    "ecdf",
    "fit_scaler",
    "fleet_report",
    "ingest_csv",
    "inverse_scale",
    "kde",
    "lifetime_reduction",
    "load_fleet",
    "make_cluster_table",
    "make_friedman1",
    "make_plant_table",
    "model_from_dict",
    "model_to_dict",
    "pearson",
    "plant_schema",
    "plant_truth",
    "predict",
    "predict_batch",
    "predict_interval",
    "predict_interval_batch",
    "quantile_solutions",
    "r_squared",
    "regression_metrics",
    "restrict_scaler",
    "rmse",
    "scalarized_objective",
    "scale",
    "shap_base_value",
    "shap_brute_force",
    "silverman_bandwidth",
    "simulate_plant",
    "solve_batch",
    "split",
    "sweep",
    "tolerance_chain",
    "train_gbt",
    "tree_shap",
    "tree_shap_batch",
    "tune_tpe",
    "verification_compare",
]
