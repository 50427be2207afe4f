"""Scalarized two-objective setpoint optimization over trained surrogates.

An ObjectiveSpec pairs a thermal-efficiency model with a heat-rate model and
combines their normalized outputs into the single scalar
-w_te * norm(TE) + w_thr * norm(THR), so that minimizing the scalar pushes
efficiency up and heat rate down at the same time. A ToleranceConstraintSet
keeps the ordered correlated operating features within tau of each other in
scaled space, and solve_batch runs the trust-region solver from many
historical operating points, returning one SolutionRecord per start.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .cobyla import CobylaSettings, cobyla_minimize
from .conformal import ConformalCalibration, predict_interval
from .data import FeatureSchema, ScalingParams, inverse_scale
from .errors import ValidationError
from .gbt import GbtModel, predict

EXPLORATION_LOWER = -0.1
EXPLORATION_UPPER = 1.1
CHAIN_TOLERANCE = 1e-6
BOUNDS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ObjectiveSpec:
    """Both surrogate models plus the normalization ranges of their targets.

    te_norm and thr_norm are the (min, max) of each target over the training
    rows; model outputs are mapped through (value - min) / (max - min) before
    they are combined, so both terms live on comparable scales.
    """

    te_model: GbtModel
    thr_model: GbtModel
    te_norm: tuple[float, float]
    thr_norm: tuple[float, float]
    weights: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        te_norm = (float(self.te_norm[0]), float(self.te_norm[1]))
        thr_norm = (float(self.thr_norm[0]), float(self.thr_norm[1]))
        weights = (float(self.weights[0]), float(self.weights[1]))
        for label, (low, high) in (("te_norm", te_norm), ("thr_norm", thr_norm)):
            if not (np.isfinite(low) and np.isfinite(high) and low < high):
                raise ValidationError(f"{label} must be a finite (min, max) with min < max")
        if not all(np.isfinite(w) for w in weights):
            raise ValidationError("weights must be finite")
        if self.te_model.feature_names != self.thr_model.feature_names:
            raise ValidationError("both models must share one feature schema")
        if not self.te_model.feature_names:
            raise ValidationError("models must carry feature names")
        object.__setattr__(self, "te_norm", te_norm)
        object.__setattr__(self, "thr_norm", thr_norm)
        object.__setattr__(self, "weights", weights)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.te_model.feature_names


def scalarized_objective(spec: ObjectiveSpec, x) -> float:
    """-w_te * norm(TE(x)) + w_thr * norm(THR(x)) at a scaled point x.

    x may wander slightly outside [0, 1] (solver exploration margin) but not
    outside [-0.1, 1.1].
    """
    x = np.asarray(x, dtype=float)
    m = len(spec.feature_names)
    if x.ndim != 1 or x.size != m:
        raise ValidationError(f"expected a length-{m} scaled vector, got {x.shape}")
    if np.any(x < EXPLORATION_LOWER) or np.any(x > EXPLORATION_UPPER):
        raise ValidationError("point outside the [-0.1, 1.1] exploration box")
    te = predict(spec.te_model, x)
    thr = predict(spec.thr_model, x)
    te_term = (te - spec.te_norm[0]) / (spec.te_norm[1] - spec.te_norm[0])
    thr_term = (thr - spec.thr_norm[0]) / (spec.thr_norm[1] - spec.thr_norm[0])
    return -spec.weights[0] * te_term + spec.weights[1] * thr_term


@dataclass(frozen=True)
class ToleranceConstraintSet:
    """Ordered correlated operating features that must stay within tau.

    indices address positions in the optimization vector (the operating
    variables in schema order). An empty set means unconstrained.
    """

    feature_names: tuple[str, ...]
    indices: tuple[int, ...]
    tau: float

    def __post_init__(self):
        names = tuple(self.feature_names)
        indices = tuple(int(i) for i in self.indices)
        tau = float(self.tau)
        if not (np.isfinite(tau) and tau > 0.0):
            raise ValidationError("tau must be a positive number")
        if len(names) != len(indices):
            raise ValidationError("feature names and indices must align")
        if len(names) == 1:
            raise ValidationError("a tolerance chain needs at least two features")
        if len(set(indices)) != len(indices):
            raise ValidationError("each feature may appear only once")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValidationError("chain features must follow schema order")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "tau", tau)

    @property
    def size(self) -> int:
        return len(self.feature_names)

    def to_dict(self) -> dict:
        return {"features": list(self.feature_names), "tau": self.tau}


def tolerance_chain(schema: FeatureSchema, feature_names, tau: float) -> ToleranceConstraintSet:
    """Build a chain over the named operating variables, sorted to schema order."""
    names = list(feature_names)
    if len(set(names)) != len(names):
        raise ValidationError("duplicate feature in tolerance chain")
    operating = list(schema.operating_names)
    for name in names:
        if name not in operating:
            raise ValidationError(f"'{name}' is not an operating variable")
    ordered = sorted(names, key=operating.index)
    indices = tuple(operating.index(name) for name in ordered)
    return ToleranceConstraintSet(tuple(ordered), indices, tau)


def build_constraints(constraint_set: ToleranceConstraintSet | None, all_pairs: bool = False):
    """Smooth inequality functions g_k(x) >= 0 for the tolerance chain.

    The absolute value |x_a - x_b| < tau splits into two inequalities per
    pair. Consecutive pairs by default; all_pairs ties every pair directly.
    """
    if constraint_set is None or constraint_set.size < 2:
        return []
    tau = constraint_set.tau
    idx = constraint_set.indices
    if all_pairs:
        pairs = list(combinations(idx, 2))
    else:
        pairs = list(zip(idx, idx[1:]))
    functions = []
    for a, b in pairs:
        functions.append(lambda x, a=a, b=b: tau - (x[a] - x[b]))
        functions.append(lambda x, a=a, b=b: tau - (x[b] - x[a]))
    return functions


@dataclass(frozen=True)
class OptimizationProblem:
    """Objective, scaled box bounds, and an optional tolerance chain."""

    objective: ObjectiveSpec
    bounds: np.ndarray = None
    constraints: ToleranceConstraintSet | None = None

    def __post_init__(self):
        m = len(self.objective.feature_names)
        bounds = self.bounds
        if bounds is None:
            bounds = np.column_stack([np.zeros(m), np.ones(m)])
        bounds = np.asarray(bounds, dtype=float)
        if bounds.shape != (m, 2):
            raise ValidationError(f"bounds must have shape ({m}, 2)")
        if np.any(bounds[:, 0] > bounds[:, 1]):
            raise ValidationError("each lower bound must be <= its upper bound")
        if np.any(bounds[:, 0] < 0.0) or np.any(bounds[:, 1] > 1.0):
            raise ValidationError("bounds must lie inside the scaled unit box")
        if self.constraints is not None and self.constraints.size > 0:
            if max(self.constraints.indices) >= m:
                raise ValidationError("constraint index outside the variable list")
        bounds.setflags(write=False)
        object.__setattr__(self, "bounds", bounds)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.objective.feature_names

    def to_dict(self) -> dict:
        chain = self.constraints
        return {
            "feature_names": list(self.feature_names),
            "bounds": [[float(lo), float(hi)] for lo, hi in self.bounds],
            "chain": chain.to_dict() if chain is not None and chain.size else None,
            "te_norm": list(self.objective.te_norm),
            "thr_norm": list(self.objective.thr_norm),
            "weights": list(self.objective.weights),
        }


@dataclass(frozen=True)
class SolutionRecord:
    """One solver run: optimum, predictions, and post-hoc feasibility."""

    initial_guess_id: int
    x_scaled: np.ndarray
    x_engineering: np.ndarray | None
    te_pred: float
    thr_pred: float
    te_interval: tuple[float, float] | None
    thr_interval: tuple[float, float] | None
    objective_value: float
    feasible: bool
    max_chain_violation: float
    evaluations: int
    status: str

    def __post_init__(self):
        x = np.asarray(self.x_scaled, dtype=float).copy()
        x.setflags(write=False)
        object.__setattr__(self, "x_scaled", x)
        if self.x_engineering is not None:
            eng = np.asarray(self.x_engineering, dtype=float).copy()
            eng.setflags(write=False)
            object.__setattr__(self, "x_engineering", eng)

    def to_dict(self) -> dict:
        return {
            "initial_guess_id": self.initial_guess_id,
            "x_scaled": [float(v) for v in self.x_scaled],
            "x_engineering": None
            if self.x_engineering is None
            else [float(v) for v in self.x_engineering],
            "te_pred": self.te_pred,
            "thr_pred": self.thr_pred,
            "te_interval": None if self.te_interval is None else list(self.te_interval),
            "thr_interval": None if self.thr_interval is None else list(self.thr_interval),
            "objective_value": self.objective_value,
            "feasible": self.feasible,
            "max_chain_violation": self.max_chain_violation,
            "evaluations": self.evaluations,
            "status": self.status,
        }


def _chain_gap(constraint_set: ToleranceConstraintSet | None, x: np.ndarray) -> float:
    """Largest scaled gap between consecutive chain features (0 if no chain)."""
    if constraint_set is None or constraint_set.size < 2:
        return 0.0
    idx = np.array(constraint_set.indices)
    return float(np.max(np.abs(x[idx[:-1]] - x[idx[1:]])))


def solve_batch(
    problem: OptimizationProblem,
    initial_guesses,
    settings: CobylaSettings | None = None,
    parallelism: int = 1,
    scaler: ScalingParams | None = None,
    te_calibration: ConformalCalibration | None = None,
    thr_calibration: ConformalCalibration | None = None,
) -> list[SolutionRecord]:
    """Solve the problem once per initial guess, in guess order.

    Guesses outside the bounds are clipped in (with a warning). Feasibility
    and the chain gap are recomputed from the raw optimum, not taken from the
    solver. The scaler, when given, must cover exactly the problem variables
    and is used to report optima in engineering units.
    """
    guesses = np.asarray(initial_guesses, dtype=float)
    if guesses.ndim == 1:
        guesses = guesses[None, :]
    m = len(problem.feature_names)
    if guesses.ndim != 2 or guesses.shape[1] != m:
        raise ValidationError(f"initial guesses must be rows of length {m}")
    if guesses.shape[0] == 0:
        raise ValidationError("at least one initial guess is required")
    if parallelism < 1:
        raise ValidationError("parallelism must be >= 1")
    if scaler is not None and tuple(scaler.names) != problem.feature_names:
        raise ValidationError("scaler variables must match the problem variables")

    lower, upper = problem.bounds[:, 0], problem.bounds[:, 1]
    clipped = np.clip(guesses, lower, upper)
    n_moved = int(np.sum(np.any(clipped != guesses, axis=1)))
    if n_moved:
        warnings.warn(f"{n_moved} initial guesses clipped into the bounds", stacklevel=2)

    spec = problem.objective
    constraint_functions = build_constraints(problem.constraints)
    settings = settings if settings is not None else CobylaSettings()

    def solve_one(guess_id: int) -> SolutionRecord:
        result = cobyla_minimize(
            lambda x: scalarized_objective(spec, x),
            constraint_functions,
            clipped[guess_id],
            problem.bounds,
            settings,
        )
        x_opt = result.x
        gap = _chain_gap(problem.constraints, x_opt)
        in_bounds = bool(
            np.all(x_opt >= lower - BOUNDS_TOLERANCE)
            and np.all(x_opt <= upper + BOUNDS_TOLERANCE)
        )
        chain_ok = (
            problem.constraints is None
            or problem.constraints.size < 2
            or gap <= problem.constraints.tau + CHAIN_TOLERANCE
        )
        te_pred = predict(spec.te_model, x_opt)
        thr_pred = predict(spec.thr_model, x_opt)
        te_interval = (
            predict_interval(spec.te_model, te_calibration, x_opt)
            if te_calibration is not None
            else None
        )
        thr_interval = (
            predict_interval(spec.thr_model, thr_calibration, x_opt)
            if thr_calibration is not None
            else None
        )
        engineering = inverse_scale(x_opt, scaler) if scaler is not None else None
        return SolutionRecord(
            initial_guess_id=guess_id,
            x_scaled=x_opt,
            x_engineering=engineering,
            te_pred=te_pred,
            thr_pred=thr_pred,
            te_interval=te_interval,
            thr_interval=thr_interval,
            objective_value=result.fun,
            feasible=in_bounds and chain_ok,
            max_chain_violation=gap,
            evaluations=result.evaluations,
            status=result.status,
        )

    if parallelism == 1:
        return [solve_one(i) for i in range(clipped.shape[0])]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(solve_one, range(clipped.shape[0])))
