"""Tests for boosted-tree training, prediction, metrics, and serialization."""
from __future__ import annotations

import json

import numpy as np
import pytest

from plantopt.errors import ValidationError
from plantopt.gbt import (
    GbtModel,
    HyperParams,
    RegressionTree,
    model_from_dict,
    model_to_dict,
    predict,
    predict_batch,
    r_squared,
    regression_metrics,
    rmse,
    train_gbt,
)
from plantopt.synthetic import make_friedman1


def hand_stump() -> RegressionTree:
    # x0 < 0.5 -> leaf value -1, else +1
    return RegressionTree(
        feature=np.array([0, -1, -1]),
        threshold=np.array([0.5, np.nan, np.nan]),
        left=np.array([1, -1, -1]),
        right=np.array([2, -1, -1]),
        value=np.array([0.0, -1.0, 1.0]),
        cover=np.array([10.0, 6.0, 4.0]),
    )


class TestHyperParams:
    def test_defaults_valid(self):
        HyperParams()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"eta": 0.0},
            {"eta": 1.2},
            {"gamma": -0.1},
            {"reg_lambda": -1.0},
            {"max_depth": 0},
            {"max_depth": 2.5},
            {"subsample": 0.0},
            {"subsample": 1.3},
            {"colsample_bytree": 0.0},
            {"n_estimators": 0},
        ],
    )
    def test_invalid_ranges_rejected(self, kwargs):
        with pytest.raises(ValidationError):
            HyperParams(**kwargs)

    def test_round_trip(self):
        hp = HyperParams(eta=0.05, max_depth=3, n_estimators=10)
        assert HyperParams.from_dict(hp.to_dict()) == hp


class TestRegressionTree:
    def test_cover_consistency_enforced(self):
        with pytest.raises(ValidationError):
            RegressionTree(
                feature=np.array([0, -1, -1]),
                threshold=np.array([0.5, np.nan, np.nan]),
                left=np.array([1, -1, -1]),
                right=np.array([2, -1, -1]),
                value=np.array([0.0, -1.0, 1.0]),
                cover=np.array([10.0, 3.0, 4.0]),
            )

    def test_internal_node_needs_children(self):
        with pytest.raises(ValidationError):
            RegressionTree(
                feature=np.array([0]),
                threshold=np.array([0.5]),
                left=np.array([-1]),
                right=np.array([-1]),
                value=np.array([0.0]),
                cover=np.array([1.0]),
            )

    def test_depth_of_stump(self):
        assert hand_stump().depth() == 1


class TestPredict:
    def test_zero_trees_returns_base_score(self):
        model = GbtModel(base_score=4.2, eta=0.3, trees=(), feature_names=("a", "b"))
        assert predict(model, np.array([0.1, 0.9])) == pytest.approx(4.2)

    def test_hand_traced_stump(self):
        # 10 + 0.5 * (-1) = 9.5 for x0 = 0.2 < 0.5
        model = GbtModel(base_score=10.0, eta=0.5, trees=(hand_stump(),), feature_names=("x0",))
        assert predict(model, np.array([0.2])) == pytest.approx(9.5)
        assert predict(model, np.array([0.7])) == pytest.approx(10.5)

    def test_threshold_routing_is_half_open(self):
        model = GbtModel(base_score=0.0, eta=1.0, trees=(hand_stump(),), feature_names=("x0",))
        # x == threshold goes right
        assert predict(model, np.array([0.5])) == pytest.approx(1.0)

    def test_batch_equals_per_row(self):
        x, y = make_friedman1(n_rows=80, seed=1)
        model = train_gbt(x, y, HyperParams(n_estimators=20, max_depth=3), seed=0)
        batch = predict_batch(model, x)
        singles = np.array([predict(model, row) for row in x])
        assert np.array_equal(batch, singles)

    def test_dimension_mismatch_rejected(self):
        model = GbtModel(base_score=0.0, eta=1.0, trees=(), feature_names=("a", "b"))
        with pytest.raises(ValidationError):
            predict(model, np.array([1.0]))
        with pytest.raises(ValidationError):
            predict_batch(model, np.zeros((3, 5)))

    def test_all_zero_leaf_tree_changes_nothing(self):
        x, y = make_friedman1(n_rows=60, seed=2)
        model = train_gbt(x, y, HyperParams(n_estimators=5, max_depth=3), seed=0)
        zero_leaf = RegressionTree(
            feature=np.array([-1]),
            threshold=np.array([np.nan]),
            left=np.array([-1]),
            right=np.array([-1]),
            value=np.array([0.0]),
            cover=np.array([60.0]),
        )
        extended = GbtModel(
            base_score=model.base_score,
            eta=model.eta,
            trees=model.trees + (zero_leaf,),
            feature_names=model.feature_names,
        )
        assert np.array_equal(predict_batch(model, x), predict_batch(extended, x))


class TestTrain:
    def test_constant_target_predicts_constant(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(size=(30, 4))
        y = np.full(30, 7.25)
        model = train_gbt(x, y, HyperParams(n_estimators=10, max_depth=4), seed=0)
        assert model.base_score == pytest.approx(7.25)
        assert np.allclose(predict_batch(model, x), 7.25)
        for tree in model.trees:
            assert np.allclose(tree.value, 0.0)

    def test_single_deep_tree_interpolates_tiny_data(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(size=(8, 2))
        y = rng.normal(size=8)
        hp = HyperParams(eta=1.0, gamma=0.0, reg_lambda=0.0, max_depth=6, n_estimators=1)
        model = train_gbt(x, y, hp, seed=0)
        assert np.allclose(predict_batch(model, x), y, atol=1e-9)

    def test_monotone_training_loss(self):
        x, y = make_friedman1(n_rows=200, seed=4)
        for hp in (
            HyperParams(n_estimators=40, max_depth=3, eta=0.2),
            HyperParams(n_estimators=40, max_depth=5, eta=1.0, gamma=0.5, reg_lambda=3.0),
        ):
            model = train_gbt(x, y, hp, seed=0)
            deltas = np.diff(model.train_rmse)
            assert np.all(deltas <= 1e-10)

    def test_depth_respects_limit(self):
        x, y = make_friedman1(n_rows=300, seed=5)
        model = train_gbt(x, y, HyperParams(n_estimators=10, max_depth=3), seed=0)
        assert all(tree.depth() <= 3 for tree in model.trees)

    def test_seed_determinism_with_subsampling(self):
        x, y = make_friedman1(n_rows=150, seed=6)
        hp = HyperParams(n_estimators=15, max_depth=3, subsample=0.7, colsample_bytree=0.6)
        a = train_gbt(x, y, hp, seed=42)
        b = train_gbt(x, y, hp, seed=42)
        c = train_gbt(x, y, hp, seed=43)
        assert np.array_equal(predict_batch(a, x), predict_batch(b, x))
        assert not np.array_equal(predict_batch(a, x), predict_batch(c, x))

    def test_friedman_benchmark_r2(self):
        x, y = make_friedman1(n_rows=1000, seed=7)
        x_train, y_train = x[:800], y[:800]
        x_test, y_test = x[800:], y[800:]
        model = train_gbt(x_train, y_train, HyperParams(), seed=0)
        assert r_squared(y_test, predict_batch(model, x_test)) >= 0.85

    def test_empty_or_bad_data_rejected(self):
        with pytest.raises(ValidationError):
            train_gbt(np.zeros((1, 3)), np.zeros(1))
        with pytest.raises(ValidationError):
            train_gbt(np.zeros((4, 3)), np.zeros(3))
        bad = np.zeros((4, 2))
        bad[0, 0] = np.nan
        with pytest.raises(ValidationError):
            train_gbt(bad, np.zeros(4))

    def test_feature_names_length_checked(self):
        x, y = make_friedman1(n_rows=20, seed=8)
        with pytest.raises(ValidationError):
            train_gbt(x, y, HyperParams(n_estimators=1), feature_names=("a",))


class TestMetrics:
    def test_r2_perfect(self):
        y = np.array([1.0, 2.0, 5.0])
        assert r_squared(y, y) == pytest.approx(1.0)

    def test_r2_mean_predictor_scores_zero(self):
        y = np.array([1.0, 2.0, 3.0, 6.0])
        assert r_squared(y, np.full(4, y.mean())) == pytest.approx(0.0)

    def test_r2_hand_case(self):
        # SS_res = 1, SS_tot = 2, so 1 - 1/2 = 0.5
        assert r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 4.0]) == pytest.approx(0.5, abs=1e-10)

    def test_r2_constant_target_rejected(self):
        with pytest.raises(ValidationError):
            r_squared([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_rmse_zero_for_exact(self):
        y = np.array([3.0, -1.0])
        assert rmse(y, y) == 0.0

    def test_rmse_hand_case(self):
        # sqrt((9 + 16) / 2) = sqrt(12.5)
        assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(np.sqrt(12.5), abs=1e-10)

    def test_rmse_homogeneity(self):
        rng = np.random.default_rng(9)
        y = rng.normal(size=30)
        r = rng.normal(size=30)
        for k in (-2.5, 0.5, 3.0):
            assert rmse(y, y + k * r) == pytest.approx(abs(k) * rmse(y, y + r), rel=1e-12)

    def test_r2_rmse_identity(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            y = rng.normal(size=40)
            yhat = y + rng.normal(scale=0.5, size=40)
            ss_tot = np.sum((y - y.mean()) ** 2)
            identity = 1.0 - (rmse(y, yhat) ** 2 * y.size) / ss_tot
            assert r_squared(y, yhat) == pytest.approx(identity, abs=1e-10)

    def test_regression_metrics_bundle(self):
        m = regression_metrics([1.0, 2.0, 3.0], [1.0, 2.0, 4.0])
        assert m.r2 == pytest.approx(0.5)
        assert m.n == 3


class TestSerialization:
    def test_round_trip_predicts_identically(self):
        x, y = make_friedman1(n_rows=120, seed=11)
        model = train_gbt(
            x,
            y,
            HyperParams(n_estimators=12, max_depth=4, subsample=0.8),
            seed=1,
            target_name="y",
            scaler_hash="abc123",
        )
        doc = json.loads(json.dumps(model_to_dict(model)))
        clone = model_from_dict(doc)
        probe = np.random.default_rng(12).uniform(size=(100, 10))
        assert np.array_equal(predict_batch(model, probe), predict_batch(clone, probe))
        assert clone.target_name == "y"
        assert clone.scaler_hash == "abc123"
        assert clone.train_rmse == model.train_rmse

    def test_unknown_schema_version_rejected(self):
        x, y = make_friedman1(n_rows=20, seed=13)
        doc = model_to_dict(train_gbt(x, y, HyperParams(n_estimators=1), seed=0))
        doc["schema_version"] = 99
        with pytest.raises(ValidationError):
            model_from_dict(doc)
