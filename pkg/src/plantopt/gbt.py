"""Gradient-boosted regression trees with exact greedy splits.

Squared-error boosting: per round the tree fits the residual gradients
g_i = prediction_i - y_i with unit Hessians, so node Hessian sums are sample
counts. Leaf weights are stored unscaled; prediction applies the learning
rate: base_score + eta * sum of tree outputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class HyperParams:
    """Boosting hyperparameters; every range checked at construction."""

    eta: float = 0.1
    gamma: float = 0.0
    reg_lambda: float = 1.0
    max_depth: int = 4
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    n_estimators: int = 300

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValidationError(f"eta must be in (0, 1], got {self.eta}")
        if self.gamma < 0.0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if self.reg_lambda < 0.0:
            raise ValidationError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise ValidationError(f"max_depth must be an integer >= 1, got {self.max_depth}")
        if not 0.0 < self.subsample <= 1.0:
            raise ValidationError(f"subsample must be in (0, 1], got {self.subsample}")
        if not 0.0 < self.colsample_bytree <= 1.0:
            raise ValidationError(
                f"colsample_bytree must be in (0, 1], got {self.colsample_bytree}"
            )
        if int(self.n_estimators) != self.n_estimators or self.n_estimators < 1:
            raise ValidationError(
                f"n_estimators must be an integer >= 1, got {self.n_estimators}"
            )
        object.__setattr__(self, "max_depth", int(self.max_depth))
        object.__setattr__(self, "n_estimators", int(self.n_estimators))

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "gamma": self.gamma,
            "reg_lambda": self.reg_lambda,
            "max_depth": self.max_depth,
            "subsample": self.subsample,
            "colsample_bytree": self.colsample_bytree,
            "n_estimators": self.n_estimators,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HyperParams":
        return cls(**doc)


@dataclass(frozen=True)
class RegressionTree:
    """Flat-array binary tree.

    feature[i] is -1 at leaves; value[i] holds the unscaled leaf weight and
    cover[i] the training sample count routed through node i. Routing sends
    x[feature] < threshold left, else right.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray

    def __post_init__(self):
        feature = np.asarray(self.feature, dtype=int)
        threshold = np.asarray(self.threshold, dtype=float)
        left = np.asarray(self.left, dtype=int)
        right = np.asarray(self.right, dtype=int)
        value = np.asarray(self.value, dtype=float)
        cover = np.asarray(self.cover, dtype=float)
        k = feature.size
        shapes = {threshold.size, left.size, right.size, value.size, cover.size}
        if shapes != {k}:
            raise ValidationError("tree arrays must share one length")
        internal = feature >= 0
        if np.any(internal & ((left < 0) | (right < 0))):
            raise ValidationError("internal nodes need both children")
        if np.any(~internal & ((left >= 0) | (right >= 0))):
            raise ValidationError("leaves must have no children")
        if internal.any():
            parents = np.flatnonzero(internal)
            if not np.allclose(
                cover[parents], cover[left[parents]] + cover[right[parents]]
            ):
                raise ValidationError("cover(parent) must equal cover(left)+cover(right)")
        for arr, name in (
            (feature, "feature"),
            (threshold, "threshold"),
            (left, "left"),
            (right, "right"),
            (value, "value"),
            (cover, "cover"),
        ):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Unscaled tree output for each row of x."""
        idx = np.zeros(x.shape[0], dtype=int)
        active = self.feature[idx] >= 0
        while active.any():
            sub = idx[active]
            go_left = x[active, self.feature[sub]] < self.threshold[sub]
            idx[active] = np.where(go_left, self.left[sub], self.right[sub])
            active = self.feature[idx] >= 0
        return self.value[idx]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if np.isnan(t) else float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "cover": self.cover.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RegressionTree":
        return cls(
            feature=np.array(doc["feature"], dtype=int),
            threshold=np.array(
                [np.nan if t is None else t for t in doc["threshold"]], dtype=float
            ),
            left=np.array(doc["left"], dtype=int),
            right=np.array(doc["right"], dtype=int),
            value=np.array(doc["value"], dtype=float),
            cover=np.array(doc["cover"], dtype=float),
        )


def _best_split(x, grad, rows, features, g_total, h_total, reg_lambda, gamma):
    """Exact greedy split over candidate features; ties resolved to the
    lowest feature index, then the lowest threshold."""
    best_gain = 0.0
    best = None
    parent_term = g_total * g_total / (h_total + reg_lambda)
    for f in features:
        xs = x[rows, f]
        order = np.argsort(xs)
        xs_sorted = xs[order]
        boundary = xs_sorted[1:] != xs_sorted[:-1]
        if not boundary.any():
            continue
        g_left = np.cumsum(grad[rows][order])[:-1]
        h_left = np.arange(1, h_total, dtype=float)
        gains = (
            0.5
            * (
                g_left * g_left / (h_left + reg_lambda)
                + (g_total - g_left) ** 2 / (h_total - h_left + reg_lambda)
                - parent_term
            )
            - gamma
        )
        gains = np.where(boundary, gains, -np.inf)
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best = (int(f), 0.5 * (xs_sorted[k] + xs_sorted[k + 1]))
    return best


def _build_tree(x, grad, hp: HyperParams, rows, features) -> RegressionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    cover: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        cover.append(0.0)
        return len(feature) - 1

    def grow(node_rows: np.ndarray, depth: int) -> int:
        node = new_node()
        g_sum = float(grad[node_rows].sum())
        h_sum = node_rows.size
        cover[node] = float(h_sum)
        split = None
        if depth < hp.max_depth and h_sum >= 2:
            split = _best_split(
                x, grad, node_rows, features, g_sum, h_sum, hp.reg_lambda, hp.gamma
            )
        if split is None:
            value[node] = -g_sum / (h_sum + hp.reg_lambda)
            return node
        f, th = split
        mask = x[node_rows, f] < th
        left_id = grow(node_rows[mask], depth + 1)
        right_id = grow(node_rows[~mask], depth + 1)
        feature[node] = f
        threshold[node] = th
        left[node] = left_id
        right[node] = right_id
        return node

    grow(np.asarray(rows), 0)
    return RegressionTree(
        feature=np.array(feature, dtype=int),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=int),
        right=np.array(right, dtype=int),
        value=np.array(value, dtype=float),
        cover=np.array(cover, dtype=float),
    )


@dataclass(frozen=True)
class GbtModel:
    """Immutable trained ensemble.

    prediction(x) = base_score + eta * sum over trees of tree output.
    train_rmse[k] is the full-training-set RMSE after k trees (index 0 is
    the base-score-only model).
    """

    base_score: float
    eta: float
    trees: tuple[RegressionTree, ...]
    feature_names: tuple[str, ...]
    target_name: str = ""
    scaler_hash: str = ""
    train_rmse: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "train_rmse", tuple(self.train_rmse))

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def predict_batch(model: GbtModel, x) -> np.ndarray:
    """Model prediction for each row of a 2-D scaled feature matrix."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValidationError(
            f"expected (n, {model.n_features}) feature matrix, got {x.shape}"
        )
    out = np.full(x.shape[0], model.base_score)
    for tree in model.trees:
        out += model.eta * tree.predict_batch(x)
    return out


def predict(model: GbtModel, x) -> float:
    """Model prediction for a single scaled feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise ValidationError(f"expected a length-{model.n_features} vector, got {x.shape}")
    return float(predict_batch(model, x[None, :])[0])


def train_gbt(
    x,
    y,
    hp: HyperParams | None = None,
    seed: int = 0,
    feature_names: tuple[str, ...] | None = None,
    target_name: str = "",
    scaler_hash: str = "",
) -> GbtModel:
    """Train a boosted ensemble on scaled features.

    Row subsampling and per-tree feature subsampling are driven by one
    generator seeded with `seed`, so training is reproducible.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.size:
        raise ValidationError("x must be (n, d) and y length n")
    if x.shape[0] < 2:
        raise ValidationError("need at least 2 training rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("training data must be finite")
    hp = hp if hp is not None else HyperParams()
    n, d = x.shape
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(d))
    if len(feature_names) != d:
        raise ValidationError("feature_names length must match feature count")

    rng = np.random.default_rng(seed)
    base_score = float(y.mean())
    pred = np.full(n, base_score)
    trees: list[RegressionTree] = []
    rmse_log = [rmse(y, pred)]
    for _ in range(hp.n_estimators):
        grad = pred - y
        if hp.subsample < 1.0:
            n_rows = max(1, int(round(hp.subsample * n)))
            rows = np.sort(rng.choice(n, size=n_rows, replace=False))
        else:
            rows = np.arange(n)
        if hp.colsample_bytree < 1.0:
            n_feats = max(1, int(round(hp.colsample_bytree * d)))
            feats = np.sort(rng.choice(d, size=n_feats, replace=False))
        else:
            feats = np.arange(d)
        tree = _build_tree(x, grad, hp, rows, feats)
        pred = pred + hp.eta * tree.predict_batch(x)
        trees.append(tree)
        rmse_log.append(rmse(y, pred))
    return GbtModel(
        base_score=base_score,
        eta=hp.eta,
        trees=tuple(trees),
        feature_names=tuple(feature_names),
        target_name=target_name,
        scaler_hash=scaler_hash,
        train_rmse=tuple(rmse_log),
    )


def r_squared(y, yhat) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot; undefined for constant y."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValidationError("r_squared needs two equal-length vectors")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValidationError("r_squared is undefined for a constant target")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def rmse(y, yhat) -> float:
    """Root mean squared residual."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValidationError("rmse needs two equal-length vectors")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


@dataclass(frozen=True)
class RegressionMetrics:
    """Fit quality on one evaluation set."""

    r2: float
    rmse: float
    n: int

    def to_dict(self) -> dict:
        return {"r2": self.r2, "rmse": self.rmse, "n": self.n}


def regression_metrics(y, yhat) -> RegressionMetrics:
    y = np.asarray(y, dtype=float)
    return RegressionMetrics(r2=r_squared(y, yhat), rmse=rmse(y, yhat), n=y.size)


MODEL_SCHEMA_VERSION = 1


def model_to_dict(model: GbtModel) -> dict:
    """Versioned plain-data form of a trained model."""
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "base_score": model.base_score,
        "eta": model.eta,
        "feature_names": list(model.feature_names),
        "target_name": model.target_name,
        "scaler_hash": model.scaler_hash,
        "train_rmse": list(model.train_rmse),
        "trees": [tree.to_dict() for tree in model.trees],
    }


def model_from_dict(doc: dict) -> GbtModel:
    version = doc.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ValidationError(f"unsupported model schema_version {version!r}")
    return GbtModel(
        base_score=float(doc["base_score"]),
        eta=float(doc["eta"]),
        trees=tuple(RegressionTree.from_dict(t) for t in doc["trees"]),
        feature_names=tuple(doc["feature_names"]),
        target_name=doc.get("target_name", ""),
        scaler_hash=doc.get("scaler_hash", ""),
        train_rmse=tuple(doc.get("train_rmse", ())),
    )
