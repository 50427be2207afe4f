"""Tolerance sweeps, quantile picks, and verification against logged actuals.

A sweep solves the same setpoint problem once without the tolerance chain
and once per tau, then scores each configuration with the Cramer-von Mises
statistic in two ways: per correlated pair, comparing the optimized values
of the two partner variables against each other (the headline similarity,
directly comparable to the baseline computed on the initial-guess data),
and per variable, comparing each optimized marginal against its historical
marginal (a drift diagnostic). Quantile picks select representative
solutions for plant trials, and verification_compare checks trialed
setpoints against window-averaged actuals with normal-approximation
confidence intervals.
"""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cobyla import CobylaSettings
from .errors import SolverError, ValidationError
from .optimize import (
    OptimizationProblem,
    SolutionRecord,
    ToleranceConstraintSet,
    solve_batch,
)
from .stats import cvm_two_sample, ecdf

QUANTILE_LEVELS = (0, 25, 50, 75, 95, 100)
SWEEP_SCHEMA_VERSION = 1
CI_Z = 1.96


@dataclass(frozen=True)
class QuantilePicks:
    """Representative solutions at the fixed quantile levels of the batch."""

    levels: tuple[int, ...]
    picks: tuple[SolutionRecord, ...]

    def __post_init__(self):
        levels = tuple(int(q) for q in self.levels)
        if levels != QUANTILE_LEVELS:
            raise ValidationError(f"quantile levels are fixed to {QUANTILE_LEVELS}")
        if len(self.picks) != len(levels):
            raise ValidationError("one pick per level required")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "picks", tuple(self.picks))

    def pick_at(self, level: int) -> SolutionRecord:
        return self.picks[self.levels.index(level)]

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "picks": [record.to_dict() for record in self.picks],
        }


def quantile_solutions(solutions, levels=QUANTILE_LEVELS) -> QuantilePicks:
    """Rank solutions by objective value and pick one per quantile level.

    The pick at level q is the element at 0-based rank ceil(q/100 * (N-1)),
    so level 0 is the best objective and level 100 the worst.
    """
    records = list(solutions)
    if not records:
        raise ValidationError("cannot take quantiles of an empty solution set")
    ordered = sorted(records, key=lambda r: (r.objective_value, r.initial_guess_id))
    n = len(ordered)
    picks = []
    for q in levels:
        q = int(q)
        if not 0 <= q <= 100:
            raise ValidationError("quantile levels must lie in [0, 100]")
        rank = -((-q * (n - 1)) // 100)
        picks.append(ordered[rank])
    return QuantilePicks(tuple(int(q) for q in levels), tuple(picks))


def _ecdf_payload(values: np.ndarray) -> dict:
    curve = ecdf(values)
    return {
        "values": [float(v) for v in curve.sorted_values],
        "probabilities": [float(p) for p in curve.probabilities],
    }


@dataclass(frozen=True)
class SweepEntry:
    """One solved configuration: unconstrained, or the chain at one tau."""

    label: str
    tau: float | None
    records: tuple[SolutionRecord, ...]
    cvm_by_pair: dict
    marginal_shift: dict
    quantiles: QuantilePicks | None
    errors: tuple[tuple[int, str], ...]
    ecdf_payload: dict
    scatter_payload: dict

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "errors", tuple(self.errors))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "tau": self.tau,
            "records": [record.to_dict() for record in self.records],
            "cvm_by_pair": {k: float(v) for k, v in self.cvm_by_pair.items()},
            "marginal_shift": {k: float(v) for k, v in self.marginal_shift.items()},
            "quantiles": None if self.quantiles is None else self.quantiles.to_dict(),
            "errors": [[guess_id, message] for guess_id, message in self.errors],
            "ecdf": self.ecdf_payload,
            "scatter": self.scatter_payload,
        }


@dataclass(frozen=True)
class SweepReport:
    """Baseline pair similarities plus one entry per solved configuration."""

    taus: tuple[float, ...]
    chain_features: tuple[str, ...]
    baseline: dict
    unconstrained: SweepEntry
    entries: tuple[SweepEntry, ...]

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValidationError("taus must be strictly ascending")
        if len(self.entries) != len(taus):
            raise ValidationError("one entry per tau required")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "chain_features", tuple(self.chain_features))
        object.__setattr__(self, "entries", tuple(self.entries))

    def to_dict(self) -> dict:
        return {
            "schema_version": SWEEP_SCHEMA_VERSION,
            "taus": list(self.taus),
            "chain_features": list(self.chain_features),
            "baseline": {k: float(v) for k, v in self.baseline.items()},
            "unconstrained": self.unconstrained.to_dict(),
            "entries": [entry.to_dict() for entry in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _solve_entry(
    label: str,
    tau: float | None,
    problem: OptimizationProblem,
    guesses: np.ndarray,
    settings: CobylaSettings,
    chain: ToleranceConstraintSet,
    scaler,
    te_calibration,
    thr_calibration,
) -> SweepEntry:
    records: list[SolutionRecord] = []
    errors: list[tuple[int, str]] = []
    for guess_id in range(guesses.shape[0]):
        try:
            record = solve_batch(
                problem,
                guesses[guess_id : guess_id + 1],
                settings=settings,
                scaler=scaler,
                te_calibration=te_calibration,
                thr_calibration=thr_calibration,
            )[0]
        except SolverError as exc:
            errors.append((guess_id, str(exc)))
            continue
        records.append(replace(record, initial_guess_id=guess_id))

    names = chain.feature_names
    indices = chain.indices
    cvm_by_pair: dict = {}
    marginal_shift: dict = {}
    ecdf_payload: dict = {}
    scatter_payload: dict = {}
    if records:
        optimized = np.array([record.x_scaled for record in records])
        for name, idx in zip(names, indices):
            initial_column = guesses[:, idx]
            optimized_column = optimized[:, idx]
            marginal_shift[name] = cvm_two_sample(
                initial_column, optimized_column
            ).statistic
            ecdf_payload[name] = {
                "initial": _ecdf_payload(initial_column),
                "optimized": _ecdf_payload(optimized_column),
            }
        for (name_a, idx_a), (name_b, idx_b) in zip(
            zip(names, indices), zip(names[1:], indices[1:])
        ):
            cvm_by_pair[f"{name_a}|{name_b}"] = cvm_two_sample(
                optimized[:, idx_a], optimized[:, idx_b]
            ).statistic
            scatter_payload[f"{name_a}|{name_b}"] = {
                "initial": np.column_stack(
                    [guesses[:, idx_a], guesses[:, idx_b]]
                ).tolist(),
                "optimized": np.column_stack(
                    [optimized[:, idx_a], optimized[:, idx_b]]
                ).tolist(),
            }
    quantiles = quantile_solutions(records) if records else None
    return SweepEntry(
        label=label,
        tau=tau,
        records=tuple(records),
        cvm_by_pair=cvm_by_pair,
        marginal_shift=marginal_shift,
        quantiles=quantiles,
        errors=tuple(errors),
        ecdf_payload=ecdf_payload,
        scatter_payload=scatter_payload,
    )


def sweep(
    problem: OptimizationProblem,
    taus,
    initial_guesses,
    settings: CobylaSettings | None = None,
    parallelism: int = 1,
    scaler=None,
    te_calibration=None,
    thr_calibration=None,
) -> SweepReport:
    """Solve unconstrained plus once per tau, scoring pair similarity.

    The problem must carry a tolerance chain; its features define which
    variables are tracked, and its own tau is replaced by each swept value.
    Solver failures are recorded per guess inside the affected entry.
    """
    chain = problem.constraints
    if chain is None or chain.size < 2:
        raise ValidationError("sweep needs a problem with a tolerance chain")
    taus = [float(t) for t in taus]
    if not taus:
        raise ValidationError("tau list must be nonempty")
    if any(t <= 0.0 for t in taus):
        raise ValidationError("every tau must be positive")
    if len(set(taus)) != len(taus):
        raise ValidationError("tau values must be distinct")
    taus = sorted(taus)
    if parallelism < 1:
        raise ValidationError("parallelism must be >= 1")
    settings = settings if settings is not None else CobylaSettings()

    guesses = np.asarray(initial_guesses, dtype=float)
    if guesses.ndim == 1:
        guesses = guesses[None, :]
    m = len(problem.feature_names)
    if guesses.ndim != 2 or guesses.shape[1] != m or guesses.shape[0] == 0:
        raise ValidationError(f"initial guesses must be nonempty rows of length {m}")
    lower, upper = problem.bounds[:, 0], problem.bounds[:, 1]
    clipped = np.clip(guesses, lower, upper)
    n_moved = int(np.sum(np.any(clipped != guesses, axis=1)))
    if n_moved:
        warnings.warn(f"{n_moved} initial guesses clipped into the bounds", stacklevel=2)

    baseline: dict = {}
    for (name_a, idx_a), (name_b, idx_b) in zip(
        zip(chain.feature_names, chain.indices),
        zip(chain.feature_names[1:], chain.indices[1:]),
    ):
        baseline[f"{name_a}|{name_b}"] = cvm_two_sample(
            clipped[:, idx_a], clipped[:, idx_b]
        ).statistic

    jobs: list[tuple[str, float | None, OptimizationProblem]] = [
        (
            "unconstrained",
            None,
            OptimizationProblem(problem.objective, problem.bounds, None),
        )
    ]
    for tau in taus:
        variant = ToleranceConstraintSet(chain.feature_names, chain.indices, tau)
        jobs.append(
            (
                f"tau={tau:g}",
                tau,
                OptimizationProblem(problem.objective, problem.bounds, variant),
            )
        )

    def run(job):
        label, tau, variant = job
        return _solve_entry(
            label,
            tau,
            variant,
            clipped,
            settings,
            chain,
            scaler,
            te_calibration,
            thr_calibration,
        )

    if parallelism == 1:
        solved = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=min(parallelism, len(jobs))) as pool:
            solved = list(pool.map(run, jobs))

    return SweepReport(
        taus=tuple(taus),
        chain_features=chain.feature_names,
        baseline=baseline,
        unconstrained=solved[0],
        entries=tuple(solved[1:]),
    )


# ---------------------------------------------------------------- actuals


@dataclass(frozen=True)
class NoiseModel:
    """Per-variable measurement noise plus an optional within-window ramp."""

    operating_sigmas: np.ndarray
    te_sigma: float = 0.0
    thr_sigma: float = 0.0
    drift: float = 0.0

    def __post_init__(self):
        sigmas = np.asarray(self.operating_sigmas, dtype=float)
        if sigmas.ndim != 1 or np.any(sigmas < 0.0) or not np.all(np.isfinite(sigmas)):
            raise ValidationError("operating sigmas must be nonnegative finite")
        if self.te_sigma < 0.0 or self.thr_sigma < 0.0:
            raise ValidationError("target sigmas must be nonnegative")
        sigmas.setflags(write=False)
        object.__setattr__(self, "operating_sigmas", sigmas)


@dataclass(frozen=True)
class ActualLog:
    """Timestamped samples of operating variables and measured performance."""

    variable_names: tuple[str, ...]
    timestamps: np.ndarray
    window_ids: np.ndarray
    operating: np.ndarray
    te: np.ndarray
    thr: np.ndarray
    interval_seconds: float

    def __post_init__(self):
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        for name in ("timestamps", "window_ids", "operating", "te", "thr"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def window_count(self) -> int:
        return 0 if self.window_ids.size == 0 else int(self.window_ids.max()) + 1

    def window_rows(self, window: int) -> np.ndarray:
        return np.flatnonzero(self.window_ids == window)


def simulate_plant(
    setpoints,
    noise: NoiseModel,
    ground_truth,
    variable_names=None,
    seed: int = 0,
    samples_per_window: int = 20,
    interval_seconds: float = 30.0,
) -> ActualLog:
    """Generate a log of noisy actuals around each setpoint vector.

    One window per setpoint row, sampled at a fixed interval. The drift term
    ramps symmetrically across the window so the window mean stays centered
    on the setpoint. ground_truth is a (te_fn, thr_fn) pair evaluated on the
    noisy operating rows.
    """
    setpoints = np.asarray(setpoints, dtype=float)
    if setpoints.ndim == 1:
        setpoints = setpoints[None, :]
    if setpoints.ndim != 2 or setpoints.shape[0] == 0:
        raise ValidationError("setpoints must be nonempty rows")
    n_windows, n_vars = setpoints.shape
    if noise.operating_sigmas.size != n_vars:
        raise ValidationError("noise model width must match the setpoints")
    if samples_per_window < 1:
        raise ValidationError("need at least one sample per window")
    if interval_seconds <= 0.0:
        raise ValidationError("sampling interval must be positive")
    if variable_names is None:
        variable_names = tuple(f"x{i}" for i in range(n_vars))
    variable_names = tuple(variable_names)
    if len(variable_names) != n_vars:
        raise ValidationError("one variable name per setpoint column required")

    te_fn, thr_fn = ground_truth
    rng = np.random.default_rng(seed)
    total = n_windows * samples_per_window
    if samples_per_window > 1:
        ramp = np.linspace(-0.5, 0.5, samples_per_window)
    else:
        ramp = np.zeros(1)
    rows = np.repeat(setpoints, samples_per_window, axis=0)
    rows = rows + rng.normal(0.0, 1.0, rows.shape) * noise.operating_sigmas
    rows = rows + noise.drift * np.tile(ramp, n_windows)[:, None]
    te = np.asarray(te_fn(rows), dtype=float) + rng.normal(0.0, 1.0, total) * noise.te_sigma
    thr = np.asarray(thr_fn(rows), dtype=float) + rng.normal(0.0, 1.0, total) * noise.thr_sigma
    return ActualLog(
        variable_names=variable_names,
        timestamps=np.arange(total, dtype=float) * interval_seconds,
        window_ids=np.repeat(np.arange(n_windows), samples_per_window),
        operating=rows,
        te=te,
        thr=thr,
        interval_seconds=float(interval_seconds),
    )


@dataclass(frozen=True)
class InstanceResult:
    """One trialed setpoint vector against its actual-operation window."""

    level: int
    setpoints: np.ndarray
    window_means: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    inside_ci: np.ndarray
    actual_te: float
    actual_thr: float
    predicted_te: float
    predicted_thr: float

    def __post_init__(self):
        for name in ("setpoints", "window_means", "ci_low", "ci_high", "inside_ci"):
            arr = np.asarray(getattr(self, name)).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "setpoints": [float(v) for v in self.setpoints],
            "window_means": [float(v) for v in self.window_means],
            "ci_low": [float(v) for v in self.ci_low],
            "ci_high": [float(v) for v in self.ci_high],
            "inside_ci": [bool(v) for v in self.inside_ci],
            "actual_te": self.actual_te,
            "actual_thr": self.actual_thr,
            "predicted_te": self.predicted_te,
            "predicted_thr": self.predicted_thr,
        }


@dataclass(frozen=True)
class VerificationReport:
    """Per-instance CI checks plus the aggregate performance deltas."""

    instances: tuple[InstanceResult, ...]
    mean_te_gain: float
    mean_thr_reduction: float
    ci_level: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))

    def to_dict(self) -> dict:
        return {
            "instances": [instance.to_dict() for instance in self.instances],
            "mean_te_gain": self.mean_te_gain,
            "mean_thr_reduction": self.mean_thr_reduction,
            "ci_level": self.ci_level,
        }


def verification_compare(
    picks: QuantilePicks,
    log: ActualLog,
    baseline_te: float,
    baseline_thr: float,
) -> VerificationReport:
    """Check each pick's setpoints against its window of logged actuals.

    Window w corresponds to pick w. Every variable gets a window mean and a
    normal-approximation 95% interval mean +- 1.96 s/sqrt(n); the setpoint
    is flagged as inside or outside. Aggregates compare window-averaged
    actual TE and THR against the supplied pre-optimization baselines.
    """
    if log.window_count != len(picks.picks):
        raise ValidationError(
            f"log has {log.window_count} windows for {len(picks.picks)} picks"
        )
    instances = []
    for w, (level, pick) in enumerate(zip(picks.levels, picks.picks)):
        if pick.x_engineering is None:
            raise ValidationError("picks must carry engineering-unit setpoints")
        rows = log.window_rows(w)
        if rows.size < 2:
            raise ValidationError(f"window {w} has fewer than 2 samples; CI undefined")
        block = log.operating[rows]
        n = rows.size
        means = block.mean(axis=0)
        spread = block.std(axis=0, ddof=1)
        half = CI_Z * spread / np.sqrt(n)
        low, high = means - half, means + half
        setpoints = np.asarray(pick.x_engineering, dtype=float)
        if setpoints.size != block.shape[1]:
            raise ValidationError("setpoint width does not match the log")
        inside = (setpoints >= low) & (setpoints <= high)
        instances.append(
            InstanceResult(
                level=level,
                setpoints=setpoints,
                window_means=means,
                ci_low=low,
                ci_high=high,
                inside_ci=inside,
                actual_te=float(log.te[rows].mean()),
                actual_thr=float(log.thr[rows].mean()),
                predicted_te=pick.te_pred,
                predicted_thr=pick.thr_pred,
            )
        )
    mean_te = float(np.mean([inst.actual_te for inst in instances]))
    mean_thr = float(np.mean([inst.actual_thr for inst in instances]))
    return VerificationReport(
        instances=tuple(instances),
        mean_te_gain=mean_te - float(baseline_te),
        mean_thr_reduction=float(baseline_thr) - mean_thr,
    )
