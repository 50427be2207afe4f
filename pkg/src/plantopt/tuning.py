"""Tree-structured Parzen Estimator for boosting hyperparameters.

The loop is the classic one: a short random warmup, then each new candidate
maximizes the density ratio l(x)/g(x) between kernel-density models of the
good (lowest-loss quantile) and bad trials. Densities are per-dimension 1-D
Gaussian mixtures; log-scaled dimensions are modeled in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .gbt import HyperParams, predict_batch, rmse, train_gbt

N_WARMUP_TRIALS = 10
GOOD_FRACTION = 0.25
N_CANDIDATES = 24


@dataclass(frozen=True)
class SearchDimension:
    """Closed range for one hyperparameter.

    log=True samples log-uniformly; integer=True rounds to the nearest
    integer after sampling (bounds must then be integral).
    """

    name: str
    low: float
    high: float
    log: bool = False
    integer: bool = False

    def __post_init__(self):
        if not self.low < self.high:
            raise ValidationError(f"{self.name}: low must be < high")
        if self.log and self.low <= 0.0:
            raise ValidationError(f"{self.name}: log dimension needs positive bounds")
        if self.integer and (self.low != int(self.low) or self.high != int(self.high)):
            raise ValidationError(f"{self.name}: integer dimension needs integral bounds")

    def transform(self, value: float) -> float:
        return math.log(value) if self.log else value

    def untransform(self, t: float) -> float:
        value = math.exp(t) if self.log else t
        value = min(max(value, self.low), self.high)
        if self.integer:
            value = int(round(value))
        return value

    def sample(self, rng: np.random.Generator) -> float:
        t = rng.uniform(self.transform(self.low), self.transform(self.high))
        return self.untransform(t)


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple[SearchDimension, ...]

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValidationError("dimension names must be unique")

    def sample(self, rng: np.random.Generator) -> dict[str, float]:
        return {d.name: d.sample(rng) for d in self.dimensions}


def default_search_space() -> SearchSpace:
    """Stock ranges for the boosting hyperparameters."""
    return SearchSpace(
        (
            SearchDimension("eta", 0.01, 0.3, log=True),
            SearchDimension("gamma", 0.0, 5.0),
            SearchDimension("reg_lambda", 0.1, 10.0, log=True),
            SearchDimension("max_depth", 2, 10, integer=True),
            SearchDimension("subsample", 0.5, 1.0),
            SearchDimension("colsample_bytree", 0.5, 1.0),
            SearchDimension("n_estimators", 50, 500, integer=True),
        )
    )


@dataclass(frozen=True)
class Trial:
    """One evaluated hyperparameter point."""

    index: int
    params: HyperParams
    validation_rmse: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "params": self.params.to_dict(),
            "validation_rmse": self.validation_rmse,
        }


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _kde_bandwidth(values: np.ndarray, span: float) -> float:
    n = values.size
    sigma = float(values.std())
    if sigma <= 0.0 or n < 2:
        return span / 4.0
    bw = 0.9 * sigma * n ** (-0.2)
    return float(min(max(bw, 1e-3 * span), span))


def _log_density(points: np.ndarray, centers: np.ndarray, bw: float) -> np.ndarray:
    z = (points[:, None] - centers[None, :]) / bw
    # log of a Gaussian mixture with equal weights
    log_kernel = -0.5 * z * z - math.log(bw * math.sqrt(2.0 * math.pi))
    peak = log_kernel.max(axis=1, keepdims=True)
    return (peak[:, 0] + np.log(np.exp(log_kernel - peak).sum(axis=1))) - math.log(
        centers.size
    )


def _propose(
    space: SearchSpace, trials: list[Trial], rng: np.random.Generator
) -> dict[str, float]:
    """Pick the candidate maximizing the good/bad density ratio."""
    order = sorted(range(len(trials)), key=lambda i: trials[i].validation_rmse)
    n_good = max(1, math.ceil(GOOD_FRACTION * len(trials)))
    good_ids = set(order[:n_good])

    params: dict[str, float] = {}
    total_score = np.zeros(N_CANDIDATES)
    candidate_values: dict[str, np.ndarray] = {}
    for dim in space.dimensions:
        observed = np.array(
            [dim.transform(getattr(t.params, dim.name)) for t in trials], dtype=float
        )
        good = observed[[i in good_ids for i in range(len(trials))]]
        bad = observed[[i not in good_ids for i in range(len(trials))]]
        if bad.size == 0:
            bad = observed
        span = dim.transform(dim.high) - dim.transform(dim.low)
        bw_good = _kde_bandwidth(good, span)
        bw_bad = _kde_bandwidth(bad, span)
        picks = good[rng.integers(0, good.size, size=N_CANDIDATES)]
        cands = picks + rng.normal(scale=bw_good, size=N_CANDIDATES)
        cands = np.clip(cands, dim.transform(dim.low), dim.transform(dim.high))
        total_score += _log_density(cands, good, bw_good) - _log_density(
            cands, bad, bw_bad
        )
        candidate_values[dim.name] = cands
    winner = int(np.argmax(total_score))
    for dim in space.dimensions:
        params[dim.name] = dim.untransform(float(candidate_values[dim.name][winner]))
    return params


def _default_objective(x: np.ndarray, y: np.ndarray, seed: int) -> Callable:
    """Validation RMSE of a model trained on 80% of the rows.

    The 80/20 split is fixed once from `seed`, so every trial scores against
    the same held-out fifth.
    """
    n = x.shape[0]
    if n < 5:
        raise ValidationError("need at least 5 rows to carve out a validation fifth")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(0.8 * n))
    train, val = perm[:n_train], perm[n_train:]

    def objective(hp: HyperParams, trial_seed: int) -> float:
        model = train_gbt(x[train], y[train], hp, seed=trial_seed)
        return rmse(y[val], predict_batch(model, x[val]))

    return objective


def tune_tpe(
    x=None,
    y=None,
    space: SearchSpace | None = None,
    budget: int = 50,
    seed: int = 0,
    objective: Callable[[HyperParams, int], float] | None = None,
) -> tuple[HyperParams, tuple[Trial, ...]]:
    """Minimize validation RMSE over a hyperparameter space.

    The first 10 trials sample the space uniformly; later trials are guided.
    Per-trial randomness derives from (seed, trial index), so reruns replay
    the identical trial log. Passing `objective` replaces the stock
    train-and-score loss with a custom one (the search logic is unchanged).
    """
    if budget < 1:
        raise ValidationError("budget must be >= 1")
    if space is None:
        space = default_search_space()
    if objective is None:
        if x is None or y is None:
            raise ValidationError("tune_tpe needs (x, y) unless an objective is given")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        objective = _default_objective(x, y, seed)

    trials: list[Trial] = []
    for index in range(budget):
        rng = _trial_rng(seed, index)
        if index < N_WARMUP_TRIALS:
            raw = space.sample(rng)
        else:
            raw = _propose(space, trials, rng)
        hp = HyperParams(**raw)
        loss = float(objective(hp, index))
        trials.append(Trial(index=index, params=hp, validation_rmse=loss))

    best = min(trials, key=lambda t: t.validation_rmse)
    return best.params, tuple(trials)
