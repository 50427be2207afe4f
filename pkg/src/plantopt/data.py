"""Dataset schema, CSV ingestion, min-max scaling, and deterministic splits.

All downstream modules work on scaled values in [0, 1]; this module owns the
mapping between engineering units and the scaled space.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataParseError, SchemaError, ValidationError

OPERATING = "operating"
PERFORMANCE = "performance"


@dataclass(frozen=True)
class VariableDef:
    """One plant variable: a short name, its unit, and its role."""

    name: str
    unit: str
    role: str
    display_name: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValidationError("variable name must be nonempty")
        if self.role not in (OPERATING, PERFORMANCE):
            raise ValidationError(
                f"variable {self.name!r}: role must be {OPERATING!r} or {PERFORMANCE!r},"
                f" got {self.role!r}"
            )
        if not self.display_name:
            object.__setattr__(self, "display_name", self.name)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered variable list; the order fixes the constraint-chain order."""

    variables: tuple[VariableDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValidationError("variable names must be unique within a schema")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def operating_names(self) -> list[str]:
        return [v.name for v in self.variables if v.role == OPERATING]

    @property
    def performance_names(self) -> list[str]:
        return [v.name for v in self.variables if v.role == PERFORMANCE]

    @property
    def operating_count(self) -> int:
        return len(self.operating_names)

    @property
    def performance_count(self) -> int:
        return len(self.performance_names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown variable {name!r}") from None

    def operating_indices(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.variables) if v.role == OPERATING])

    def role_of(self, name: str) -> str:
        return self.variables[self.index_of(name)].role


def plant_schema() -> FeatureSchema:
    """Default 660 MW supercritical unit schema: 9 operating + 2 performance."""
    ops = [
        ("CFR", "t/h", "coal flow rate"),
        ("TAF", "t/h", "total air flow rate"),
        ("MSP", "MPa", "main steam pressure"),
        ("MST", "degC", "main steam temperature"),
        ("MSF", "t/h", "main steam flow rate"),
        ("FWT", "degC", "feed water temperature"),
        ("RHT", "degC", "reheat temperature"),
        ("CV", "kPa", "condenser vacuum"),
        ("Power", "MW", "generated power"),
    ]
    perf = [
        ("TE", "%", "thermal efficiency"),
        ("THR", "kJ/kWh", "turbine heat rate"),
    ]
    variables = [VariableDef(n, u, OPERATING, d) for n, u, d in ops]
    variables += [VariableDef(n, u, PERFORMANCE, d) for n, u, d in perf]
    return FeatureSchema(tuple(variables))


@dataclass(frozen=True)
class DataTable:
    """Immutable table of observations in schema column order."""

    schema: FeatureSchema
    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.schema.variables):
            raise ValidationError(
                f"values must be (N, {len(self.schema.variables)}), got {values.shape}"
            )
        if values.shape[0] < 2:
            raise ValidationError("a DataTable needs at least 2 observations")
        if not np.all(np.isfinite(values)):
            raise ValidationError("all values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.schema.index_of(name)]

    def operating_matrix(self) -> np.ndarray:
        return self.values[:, self.schema.operating_indices()]


def ingest_csv(source, schema: FeatureSchema) -> DataTable:
    """Parse a comma-delimited UTF-8 byte stream into a DataTable.

    The header must contain every schema variable (order-insensitive; extra
    columns are ignored). Cells must parse as finite numbers.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataParseError("empty input: no header row") from None
    header = [h.strip() for h in header]

    col_of = {}
    for name in schema.names:
        if name not in header:
            raise SchemaError(f"missing column {name!r} in CSV header")
        col_of[name] = header.index(name)

    rows: list[list[float]] = []
    for row_num, raw_row in enumerate(reader, start=1):
        if not raw_row or all(not c.strip() for c in raw_row):
            continue
        parsed = []
        for name in schema.names:
            idx = col_of[name]
            cell = raw_row[idx].strip() if idx < len(raw_row) else ""
            if not cell:
                raise DataParseError(
                    f"missing value at row {row_num}, column {name}", row=row_num, column=name
                )
            try:
                value = float(cell)
            except ValueError:
                raise DataParseError(
                    f"non-numeric value {cell!r} at row {row_num}, column {name}",
                    row=row_num,
                    column=name,
                ) from None
            if not np.isfinite(value):
                raise DataParseError(
                    f"non-finite value {cell!r} at row {row_num}, column {name}",
                    row=row_num,
                    column=name,
                )
            parsed.append(value)
        rows.append(parsed)

    if not rows:
        raise DataParseError("empty input: header but no data rows")
    return DataTable(schema=schema, values=np.array(rows, dtype=float))


@dataclass(frozen=True)
class ScalingParams:
    """Per-variable (min, max) pairs fitted on training rows only."""

    names: tuple[str, ...]
    minimums: np.ndarray
    maximums: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.minimums, dtype=float)
        maxs = np.asarray(self.maximums, dtype=float)
        if mins.shape != maxs.shape or mins.shape != (len(self.names),):
            raise ValidationError("min/max arrays must match the variable list")
        if np.any(mins > maxs):
            raise ValidationError("min must be <= max for every variable")
        mins.setflags(write=False)
        maxs.setflags(write=False)
        object.__setattr__(self, "minimums", mins)
        object.__setattr__(self, "maximums", maxs)
        object.__setattr__(self, "names", tuple(self.names))

    def range_of(self, name: str) -> tuple[float, float]:
        i = self.names.index(name)
        return float(self.minimums[i]), float(self.maximums[i])

    @property
    def constant_mask(self) -> np.ndarray:
        return self.maximums == self.minimums

    def content_hash(self) -> str:
        import hashlib

        payload = json.dumps(
            {
                "names": list(self.names),
                "min": [repr(float(v)) for v in self.minimums],
                "max": [repr(float(v)) for v in self.maximums],
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "minimums": [float(v) for v in self.minimums],
            "maximums": [float(v) for v in self.maximums],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ScalingParams":
        return cls(
            names=tuple(doc["names"]),
            minimums=np.array(doc["minimums"], dtype=float),
            maximums=np.array(doc["maximums"], dtype=float),
        )


def fit_scaler(table: DataTable, indices=None) -> ScalingParams:
    """Fit per-variable min/max over the selected rows (all rows if None)."""
    if indices is None:
        rows = table.values
    else:
        indices = np.asarray(indices, dtype=int)
        if indices.size == 0:
            raise ValidationError("fit_scaler needs a nonempty index set")
        rows = table.values[indices]
    return ScalingParams(
        names=tuple(table.schema.names),
        minimums=rows.min(axis=0),
        maximums=rows.max(axis=0),
    )


def scale(values, params: ScalingParams) -> np.ndarray:
    """Map engineering-unit values to (x - min) / (max - min), no clipping.

    Constant variables (max == min) map to 0 everywhere.
    """
    arr = np.asarray(values, dtype=float)
    span = params.maximums - params.minimums
    safe_span = np.where(span == 0.0, 1.0, span)
    scaled = (arr - params.minimums) / safe_span
    return np.where(span == 0.0, 0.0, scaled)


def inverse_scale(scaled, params: ScalingParams) -> np.ndarray:
    """Invert `scale`; constant variables map back to their single value."""
    arr = np.asarray(scaled, dtype=float)
    span = params.maximums - params.minimums
    return params.minimums + arr * span


def restrict_scaler(params: ScalingParams, names) -> ScalingParams:
    """Scaler restricted to the named variables, preserving the given order."""
    names = tuple(names)
    missing = [n for n in names if n not in params.names]
    if missing:
        raise ValidationError(f"scaler has no entry for {missing}")
    idx = [params.names.index(n) for n in names]
    return ScalingParams(
        names=names,
        minimums=params.minimums[idx],
        maximums=params.maximums[idx],
    )


@dataclass(frozen=True)
class DataSplits:
    """Disjoint train/test/calibration row indices for a fixed seed."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    calibration_indices: np.ndarray
    seed: int

    def __post_init__(self):
        for attr in ("train_indices", "test_indices", "calibration_indices"):
            arr = np.asarray(getattr(self, attr), dtype=int)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        parts = [self.train_indices, self.test_indices, self.calibration_indices]
        combined = np.concatenate(parts)
        if len(np.unique(combined)) != len(combined):
            raise ValidationError("split index sets must be disjoint")

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": 1,
                "seed": self.seed,
                "train_indices": self.train_indices.tolist(),
                "test_indices": self.test_indices.tolist(),
                "calibration_indices": self.calibration_indices.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "DataSplits":
        doc = json.loads(text)
        return cls(
            train_indices=np.array(doc["train_indices"], dtype=int),
            test_indices=np.array(doc["test_indices"], dtype=int),
            calibration_indices=np.array(doc["calibration_indices"], dtype=int),
            seed=int(doc["seed"]),
        )


def split(
    table: DataTable,
    train_fraction: float = 0.8,
    calibration_fraction: float = 0.0,
    seed: int = 0,
) -> DataSplits:
    """Seed-deterministic disjoint split; floor rounding, remainder to test.

    test fraction = 1 - train_fraction - calibration_fraction.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError("train_fraction must be in (0, 1)")
    if not 0.0 <= calibration_fraction < 1.0:
        raise ValidationError("calibration_fraction must be in [0, 1)")
    if train_fraction + calibration_fraction >= 1.0:
        raise ValidationError("train + calibration fractions must leave room for test")

    n = table.n_rows
    n_train = int(np.floor(train_fraction * n))
    n_cal = int(np.floor(calibration_fraction * n))
    n_test = n - n_train - n_cal
    if n_train < 1 or n_test < 1 or (calibration_fraction > 0 and n_cal < 1):
        raise ValidationError(
            f"N={n} is too small to give each requested partition at least one row"
        )

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return DataSplits(
        train_indices=np.sort(perm[:n_train]),
        calibration_indices=np.sort(perm[n_train : n_train + n_cal]),
        test_indices=np.sort(perm[n_train + n_cal :]),
        seed=seed,
    )
