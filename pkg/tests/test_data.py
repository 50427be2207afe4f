"""Tests for schema, ingestion, scaling, and splits."""
from __future__ import annotations

import io
import json

import numpy as np
import pytest

from plantopt.data import (
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
from plantopt.errors import DataParseError, SchemaError, ValidationError


def small_schema() -> FeatureSchema:
    return FeatureSchema(
        (
            VariableDef("a", "u", "operating"),
            VariableDef("b", "u", "operating"),
            VariableDef("y", "u", "performance"),
        )
    )


class TestSchema:
    def test_plant_schema_order_and_roles(self):
        schema = plant_schema()
        assert schema.operating_names == [
            "CFR",
            "TAF",
            "MSP",
            "MST",
            "MSF",
            "FWT",
            "RHT",
            "CV",
            "Power",
        ]
        assert schema.performance_names == ["TE", "THR"]
        assert schema.operating_count == 9
        assert schema.performance_count == 2

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValidationError):
            FeatureSchema(
                (VariableDef("a", "u", "operating"), VariableDef("a", "u", "operating"))
            )

    def test_bad_role_rejected(self):
        with pytest.raises(ValidationError):
            VariableDef("a", "u", "input")

    def test_empty_name_rejected(self):
        with pytest.raises(ValidationError):
            VariableDef("", "u", "operating")

    def test_index_of_unknown_name(self):
        with pytest.raises(SchemaError):
            small_schema().index_of("zz")


class TestDataTable:
    def test_minimum_two_rows(self):
        with pytest.raises(ValidationError):
            DataTable(small_schema(), np.array([[1.0, 2.0, 3.0]]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            DataTable(small_schema(), np.array([[1.0, 2.0, 3.0], [np.nan, 2.0, 3.0]]))

    def test_wrong_width_rejected(self):
        with pytest.raises(ValidationError):
            DataTable(small_schema(), np.zeros((3, 2)))

    def test_values_immutable(self):
        table = DataTable(small_schema(), np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
        with pytest.raises(ValueError):
            table.values[0, 0] = 9.0

    def test_column_and_operating_matrix(self):
        table = DataTable(small_schema(), np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
        assert np.array_equal(table.column("b"), [2.0, 5.0])
        assert np.array_equal(table.operating_matrix(), [[1.0, 2.0], [4.0, 5.0]])


class TestIngestCsv:
    def test_round_trip_with_reordered_and_extra_columns(self):
        text = "y,extra,b,a\n3.0,9,2.0,1.0\n6.0,9,5.0,4.0\n"
        table = ingest_csv(text, small_schema())
        assert table.n_rows == 2
        assert np.array_equal(table.values, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_bytes_and_stream_inputs(self):
        text = "a,b,y\n1,2,3\n4,5,6\n"
        t1 = ingest_csv(text.encode("utf-8"), small_schema())
        t2 = ingest_csv(io.BytesIO(text.encode("utf-8")), small_schema())
        assert np.array_equal(t1.values, t2.values)

    def test_missing_column_names_the_column(self):
        with pytest.raises(SchemaError, match="'b'"):
            ingest_csv("a,y\n1,3\n4,6\n", small_schema())

    def test_bad_cell_reports_row_and_column(self):
        with pytest.raises(DataParseError) as err:
            ingest_csv("a,b,y\n1,2,3\n4,oops,6\n", small_schema())
        assert err.value.row == 2
        assert err.value.column == "b"

    def test_missing_cell_reports_row_and_column(self):
        with pytest.raises(DataParseError) as err:
            ingest_csv("a,b,y\n1,2,3\n4,,6\n", small_schema())
        assert err.value.row == 2
        assert err.value.column == "b"

    def test_non_finite_cell_rejected(self):
        with pytest.raises(DataParseError):
            ingest_csv("a,b,y\n1,2,3\ninf,5,6\n", small_schema())

    def test_header_only_rejected(self):
        with pytest.raises(DataParseError):
            ingest_csv("a,b,y\n", small_schema())

    def test_empty_input_rejected(self):
        with pytest.raises(DataParseError):
            ingest_csv("", small_schema())

    def test_blank_lines_skipped(self):
        table = ingest_csv("a,b,y\n1,2,3\n\n4,5,6\n\n", small_schema())
        assert table.n_rows == 2


class TestScaling:
    def test_midpoint_maps_to_half(self):
        # Oracle by hand: (4 - 2) / (6 - 2) = 0.5.
        params = ScalingParams(("a",), np.array([2.0]), np.array([6.0]))
        assert scale(np.array([4.0]), params)[0] == pytest.approx(0.5)

    def test_endpoints_map_to_zero_and_one(self):
        params = ScalingParams(("a",), np.array([2.0]), np.array([6.0]))
        out = scale(np.array([[2.0], [6.0]]), params)
        assert out[0, 0] == pytest.approx(0.0)
        assert out[1, 0] == pytest.approx(1.0)

    def test_no_clipping_outside_range(self):
        params = ScalingParams(("a",), np.array([2.0]), np.array([6.0]))
        out = scale(np.array([8.0]), params)
        assert out[0] == pytest.approx(1.5)

    def test_constant_column_scales_to_zero(self):
        params = ScalingParams(("a", "c"), np.array([2.0, 5.0]), np.array([6.0, 5.0]))
        out = scale(np.array([[4.0, 5.0], [2.0, 5.0]]), params)
        assert np.array_equal(out[:, 1], [0.0, 0.0])

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(7)
        params = ScalingParams(
            ("a", "b", "c"),
            np.array([0.0, -3.0, 10.0]),
            np.array([1.0, 7.0, 20.0]),
        )
        x = rng.uniform(-5, 25, size=(20, 3))
        assert np.allclose(inverse_scale(scale(x, params), params), x)

    def test_inverse_of_constant_column_returns_the_value(self):
        params = ScalingParams(("c",), np.array([5.0]), np.array([5.0]))
        assert inverse_scale(np.array([0.0]), params)[0] == pytest.approx(5.0)

    def test_fit_scaler_uses_only_selected_rows(self):
        table = DataTable(
            small_schema(),
            np.array([[0.0, 0.0, 0.0], [10.0, 10.0, 10.0], [100.0, 100.0, 100.0]]),
        )
        params = fit_scaler(table, indices=[0, 1])
        assert params.range_of("a") == (0.0, 10.0)

    def test_min_above_max_rejected(self):
        with pytest.raises(ValidationError):
            ScalingParams(("a",), np.array([6.0]), np.array([2.0]))

    def test_serialization_round_trip(self):
        params = ScalingParams(("a", "b"), np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        clone = ScalingParams.from_dict(json.loads(json.dumps(params.to_dict())))
        assert clone.names == params.names
        assert np.array_equal(clone.minimums, params.minimums)
        assert np.array_equal(clone.maximums, params.maximums)


class TestSplit:
    def make_table(self, n: int) -> DataTable:
        rng = np.random.default_rng(0)
        return DataTable(small_schema(), rng.normal(size=(n, 3)))

    def test_sizes_floor_with_remainder_to_test(self):
        # N=10, train 0.75, cal 0.12: floor(7.5)=7 train, floor(1.2)=1 cal, 2 test.
        splits = split(self.make_table(10), 0.75, 0.12, seed=3)
        assert len(splits.train_indices) == 7
        assert len(splits.calibration_indices) == 1
        assert len(splits.test_indices) == 2

    def test_disjoint_and_complete(self):
        splits = split(self.make_table(57), 0.6, 0.2, seed=11)
        combined = np.concatenate(
            [splits.train_indices, splits.calibration_indices, splits.test_indices]
        )
        assert sorted(combined.tolist()) == list(range(57))

    def test_seed_determinism(self):
        table = self.make_table(40)
        a = split(table, 0.7, 0.1, seed=5)
        b = split(table, 0.7, 0.1, seed=5)
        c = split(table, 0.7, 0.1, seed=6)
        assert np.array_equal(a.train_indices, b.train_indices)
        assert not np.array_equal(a.train_indices, c.train_indices)

    def test_zero_calibration_fraction(self):
        splits = split(self.make_table(10), 0.8, 0.0, seed=1)
        assert len(splits.calibration_indices) == 0
        assert len(splits.train_indices) == 8
        assert len(splits.test_indices) == 2

    def test_too_small_table_rejected(self):
        with pytest.raises(ValidationError):
            split(self.make_table(3), 0.9, 0.05, seed=0)

    def test_bad_fractions_rejected(self):
        table = self.make_table(10)
        with pytest.raises(ValidationError):
            split(table, 0.0, 0.1, seed=0)
        with pytest.raises(ValidationError):
            split(table, 0.9, 0.1, seed=0)

    def test_overlap_rejected_in_constructor(self):
        with pytest.raises(ValidationError):
            DataSplits(
                train_indices=np.array([0, 1]),
                test_indices=np.array([1, 2]),
                calibration_indices=np.array([], dtype=int),
                seed=0,
            )

    def test_json_round_trip(self):
        splits = split(self.make_table(25), 0.6, 0.2, seed=9)
        clone = DataSplits.from_json(splits.to_json())
        assert np.array_equal(clone.train_indices, splits.train_indices)
        assert np.array_equal(clone.test_indices, splits.test_indices)
        assert np.array_equal(clone.calibration_indices, splits.calibration_indices)
        assert clone.seed == splits.seed


class TestRestrictScaler:
    def test_preserves_requested_order(self):
        params = ScalingParams(
            names=("a", "b", "c"),
            minimums=np.array([0.0, 10.0, -5.0]),
            maximums=np.array([1.0, 20.0, 5.0]),
        )
        narrowed = restrict_scaler(params, ["c", "a"])
        assert narrowed.names == ("c", "a")
        assert np.array_equal(narrowed.minimums, [-5.0, 0.0])
        assert np.array_equal(narrowed.maximums, [5.0, 1.0])

    def test_round_trips_with_scale(self):
        params = ScalingParams(
            names=("a", "b"),
            minimums=np.array([2.0, 100.0]),
            maximums=np.array([6.0, 300.0]),
        )
        narrowed = restrict_scaler(params, ["b"])
        assert scale(np.array([200.0]), narrowed) == pytest.approx([0.5])

    def test_unknown_name_rejected(self):
        params = ScalingParams(
            names=("a",), minimums=np.array([0.0]), maximums=np.array([1.0])
        )
        with pytest.raises(ValidationError):
            restrict_scaler(params, ["a", "zz"])
