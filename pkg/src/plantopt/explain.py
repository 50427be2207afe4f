"""Exact Shapley attribution for tree ensembles.

Each leaf of a tree induces a multilinear game over the distinct features on
its root-to-leaf path: v(S) = w * prod_{d in S} p_d * prod_{d not in S} q_d,
where p_d indicates whether the instance satisfies every split condition on
feature d along the path and q_d is the product of training cover ratios of
those splits. Shapley values of such product games have a closed form built
from subset-sum polynomial coefficients; summing over leaves and trees gives
the classic path-dependent attribution. A brute-force subset enumeration of
the same cover-weighted game serves as the oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .gbt import GbtModel, RegressionTree, predict_batch

BRUTE_FORCE_FEATURE_LIMIT = 15


def _permutation_weights(n_players: int) -> np.ndarray:
    """w[k] = k! (D-1-k)! / D! for k = 0..D-1."""
    d = n_players
    return np.array(
        [math.factorial(k) * math.factorial(d - 1 - k) / math.factorial(d) for k in range(d)]
    )


@dataclass(frozen=True)
class _LeafGame:
    """Static per-leaf data: the players, their cover ratios, and the split
    conditions needed to evaluate the instance indicators."""

    weight: float
    features: np.ndarray
    zero_fractions: np.ndarray
    conditions: tuple[tuple[int, float, bool], ...]  # (player slot, threshold, goes_left)


def _leaf_games(tree: RegressionTree) -> list[_LeafGame]:
    if np.any(tree.cover <= 0.0):
        raise ValidationError("tree_shap needs positive cover counts on every node")
    games: list[_LeafGame] = []

    def walk(node: int, conditions: list[tuple[int, float, bool]]):
        f = int(tree.feature[node])
        if f < 0:
            players: list[int] = []
            slot_of: dict[int, int] = {}
            q: list[float] = []
            conds: list[tuple[int, float, bool]] = []
            for feat, threshold, goes_left, ratio in conditions:
                if feat not in slot_of:
                    slot_of[feat] = len(players)
                    players.append(feat)
                    q.append(1.0)
                slot = slot_of[feat]
                q[slot] *= ratio
                conds.append((slot, threshold, goes_left))
            games.append(
                _LeafGame(
                    weight=float(tree.value[node]),
                    features=np.array(players, dtype=int),
                    zero_fractions=np.array(q, dtype=float),
                    conditions=tuple(conds),
                )
            )
            return
        threshold = float(tree.threshold[node])
        left, right = int(tree.left[node]), int(tree.right[node])
        ratio_left = float(tree.cover[left] / tree.cover[node])
        walk(left, conditions + [(f, threshold, True, ratio_left)])
        walk(right, conditions + [(f, threshold, False, 1.0 - ratio_left)])

    walk(0, [])
    return games


def _one_fractions(game: _LeafGame, x: np.ndarray) -> np.ndarray:
    """(n, D) indicator matrix: instance satisfies all of player d's splits."""
    n = x.shape[0]
    p = np.ones((n, game.features.size))
    for slot, threshold, goes_left in game.conditions:
        feat = game.features[slot]
        passed = x[:, feat] < threshold if goes_left else x[:, feat] >= threshold
        p[:, slot] *= passed
    return p


def _tree_shap_one_tree(tree: RegressionTree, x: np.ndarray, n_features: int):
    """Per-tree attribution for a batch: returns (phi (n, m), base scalar)."""
    n = x.shape[0]
    phi = np.zeros((n, n_features))
    base = 0.0
    for game in _leaf_games(tree):
        d = game.features.size
        base += game.weight * float(np.prod(game.zero_fractions))
        if d == 0:
            continue
        p = _one_fractions(game, x)
        q = game.zero_fractions
        # subset-sum polynomial over all players: coeffs (d+1, n)
        coeffs = np.zeros((d + 1, n))
        coeffs[0] = 1.0
        for j in range(d):
            for k in range(j + 1, 0, -1):
                coeffs[k] = coeffs[k] * q[j] + coeffs[k - 1] * p[:, j]
            coeffs[0] = coeffs[0] * q[j]
        weights = _permutation_weights(d)
        for j in range(d):
            # remove player j by synthetic division, both indicator branches
            absent = coeffs[:d] / q[j]
            present = np.empty((d, n))
            present[d - 1] = coeffs[d]
            for k in range(d - 1, 0, -1):
                present[k - 1] = coeffs[k] - present[k] * q[j]
            reduced = np.where(p[:, j][None, :] == 1.0, present, absent)
            contribution = (weights[:, None] * reduced).sum(axis=0)
            phi[:, game.features[j]] += game.weight * (p[:, j] - q[j]) * contribution
    return phi, base


def shap_base_value(model: GbtModel) -> float:
    """Expected model output under cover weighting (the attribution baseline)."""
    base = model.base_score
    for tree in model.trees:
        if np.any(tree.cover <= 0.0):
            raise ValidationError("tree_shap needs positive cover counts on every node")
        leaves = tree.feature < 0
        base += model.eta * float(
            np.sum(tree.value[leaves] * tree.cover[leaves]) / tree.cover[0]
        )
    return float(base)


def tree_shap_batch(model: GbtModel, x) -> np.ndarray:
    """Exact path-dependent Shapley values for each row of x, shape (n, m)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValidationError(
            f"expected (n, {model.n_features}) feature matrix, got {x.shape}"
        )
    phi = np.zeros((x.shape[0], model.n_features))
    for tree in model.trees:
        tree_phi, _ = _tree_shap_one_tree(tree, x, model.n_features)
        phi += model.eta * tree_phi
    return phi


def tree_shap(model: GbtModel, x) -> np.ndarray:
    """Attribution vector for a single scaled feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise ValidationError(f"expected a length-{model.n_features} vector, got {x.shape}")
    return tree_shap_batch(model, x[None, :])[0]


def _marginal_tree_value(tree: RegressionTree, x: np.ndarray, known: frozenset) -> float:
    """Cover-weighted conditional expectation of one tree given features in
    `known` fixed at x and the rest marginalized."""

    def rec(node: int) -> float:
        f = int(tree.feature[node])
        if f < 0:
            return float(tree.value[node])
        left, right = int(tree.left[node]), int(tree.right[node])
        if f in known:
            follow = left if x[f] < tree.threshold[node] else right
            return rec(follow)
        w_left = float(tree.cover[left] / tree.cover[node])
        return w_left * rec(left) + (1.0 - w_left) * rec(right)

    return rec(0)


def shap_brute_force(model: GbtModel, x) -> np.ndarray:
    """Shapley values by subset enumeration; oracle for tree_shap.

    Uses the same cover-weighted conditional-expectation game, so agreement
    with tree_shap is exact up to float noise. Refuses more than
    15 features (2^m subsets).
    """
    x = np.asarray(x, dtype=float)
    m = model.n_features
    if x.ndim != 1 or x.size != m:
        raise ValidationError(f"expected a length-{m} vector, got {x.shape}")
    if m > BRUTE_FORCE_FEATURE_LIMIT:
        raise ValidationError(
            f"brute force enumerates 2^m subsets; refusing m={m} > {BRUTE_FORCE_FEATURE_LIMIT}"
        )
    for tree in model.trees:
        if np.any(tree.cover <= 0.0):
            raise ValidationError("shap_brute_force needs positive cover counts")

    values = np.empty(2**m)
    for mask in range(2**m):
        known = frozenset(f for f in range(m) if mask >> f & 1)
        total = model.base_score
        for tree in model.trees:
            total += model.eta * _marginal_tree_value(tree, x, known)
        values[mask] = total

    phi = np.zeros(m)
    fact = [math.factorial(k) for k in range(m + 1)]
    for mask in range(2**m):
        size = bin(mask).count("1")
        weight = fact[size] * fact[m - size - 1] / fact[m]
        for f in range(m):
            if not mask >> f & 1:
                phi[f] += weight * (values[mask | (1 << f)] - values[mask])
    return phi


@dataclass(frozen=True)
class ShapReport:
    """Batch attribution with per-feature aggregation for display."""

    feature_names: tuple[str, ...]
    phi: np.ndarray
    base_value: float
    mean_abs: np.ndarray
    percentages: np.ndarray

    def __post_init__(self):
        for attr in ("phi", "mean_abs", "percentages"):
            arr = np.asarray(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def ranking(self) -> tuple[tuple[str, float], ...]:
        order = np.argsort(-self.percentages, kind="stable")
        return tuple((self.feature_names[i], float(self.percentages[i])) for i in order)

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "base_value": self.base_value,
            "mean_abs": self.mean_abs.tolist(),
            "percentages": self.percentages.tolist(),
            "ranking": [[name, pct] for name, pct in self.ranking()],
            "n_rows": int(self.phi.shape[0]),
        }


def build_shap_report(model: GbtModel, x) -> ShapReport:
    """Attribute every row of x and aggregate mean |phi| into percentages."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError("need a nonempty 2-D evaluation matrix")
    phi = tree_shap_batch(model, x)
    mean_abs = np.abs(phi).mean(axis=0)
    total = float(mean_abs.sum())
    if total == 0.0:
        raise ValidationError("model output is feature-independent; no contributions")
    return ShapReport(
        feature_names=model.feature_names,
        phi=phi,
        base_value=shap_base_value(model),
        mean_abs=mean_abs,
        percentages=100.0 * mean_abs / total,
    )


def contribution_percentages(model: GbtModel, x) -> tuple[tuple[str, float], ...]:
    """Ranked (feature, percent) list over an evaluation set, descending."""
    return build_shap_report(model, x).ranking()
