"""Fleet-level lifetime CO2 accounting for an efficiency improvement.

A thermal efficiency gain of delta_pp percentage points at fixed output
cuts fuel burn, and therefore CO2, in proportion to 1 - eta0/eta1. This
module scales that per-plant saving over each plant's remaining life and
aggregates a fleet into per-country subtotals and a grand total.

The emission model is deliberately transparent: emission_factor is the
plant's CO2 intensity in kg per kWh generated at its current efficiency
eta0, and intensity scales inversely with efficiency at fixed output, so
intensity(eta1) = emission_factor * eta0 / eta1. Published estimates for
comparable fleets are shipped alongside the reference configuration as
display values only; they are not outputs of this formula.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ValidationError

HOURS_PER_YEAR = 8760
FLEET_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FleetPlant:
    """One generating unit in the fleet.

    emission_factor is kg CO2 per kWh generated at the unit's current
    efficiency; capacity is the nameplate rating in MW.
    """

    name: str
    country: str
    capacity_mw: float
    capacity_factor: float
    efficiency: float
    remaining_life_years: float
    emission_factor: float

    def __post_init__(self):
        if not self.name or not self.country:
            raise ValidationError("plant name and country must be nonempty")
        if not self.capacity_mw > 0:
            raise ValidationError(f"{self.name}: capacity must be positive")
        if not 0.0 < self.efficiency < 1.0:
            raise ValidationError(f"{self.name}: efficiency must lie in (0, 1)")
        if not 0.0 < self.capacity_factor <= 1.0:
            raise ValidationError(f"{self.name}: capacity factor must lie in (0, 1]")
        if self.remaining_life_years < 0:
            raise ValidationError(f"{self.name}: remaining life cannot be negative")
        if not self.emission_factor > 0:
            raise ValidationError(f"{self.name}: emission factor must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "FleetPlant":
        try:
            return cls(
                name=str(doc["name"]),
                country=str(doc["country"]),
                capacity_mw=float(doc["capacity_mw"]),
                capacity_factor=float(doc["capacity_factor"]),
                efficiency=float(doc["efficiency"]),
                remaining_life_years=float(doc["remaining_life_years"]),
                emission_factor=float(doc["emission_factor"]),
            )
        except KeyError as exc:
            raise ValidationError(f"plant record is missing field {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "country": self.country,
            "capacity_mw": self.capacity_mw,
            "capacity_factor": self.capacity_factor,
            "efficiency": self.efficiency,
            "remaining_life_years": self.remaining_life_years,
            "emission_factor": self.emission_factor,
        }


def lifetime_reduction(plant: FleetPlant, delta_pp: float) -> float:
    """Lifetime CO2 reduction in tonnes for a delta_pp efficiency gain.

    Annual generation G = capacity * 8760 * capacity_factor (kWh); the
    baseline emits G * emission_factor kg per year, and raising efficiency
    from eta0 to eta1 = eta0 + delta_pp/100 at fixed output saves the
    fraction 1 - eta0/eta1 of that, accumulated over the remaining life.
    """
    delta_pp = float(delta_pp)
    if not delta_pp >= 0:
        raise ValidationError("delta_pp must be nonnegative")
    eta1 = plant.efficiency + delta_pp / 100.0
    if not eta1 < 1.0:
        raise ValidationError(
            f"{plant.name}: improved efficiency {eta1:.4f} must stay below 1"
        )
    annual_kwh = plant.capacity_mw * 1000.0 * HOURS_PER_YEAR * plant.capacity_factor
    baseline_kg_per_year = annual_kwh * plant.emission_factor
    saved_fraction = 1.0 - plant.efficiency / eta1
    return baseline_kg_per_year * saved_fraction * plant.remaining_life_years / 1000.0


@dataclass(frozen=True)
class PlantReduction:
    """Per-plant line item of a fleet report."""

    name: str
    country: str
    tonnes: float

    def to_dict(self) -> dict:
        return {"name": self.name, "country": self.country, "tonnes": self.tonnes}


@dataclass(frozen=True)
class CarbonReport:
    """Fleet CO2 reductions reconciled plant -> country -> total.

    Subtotals are the plain sums of their plants' stored tonnes in fleet
    order, and the total is the plain sum of the subtotals in report
    order, so regrouping the stored values reproduces both exactly.
    """

    delta_pp: float
    plants: tuple[PlantReduction, ...]
    subtotals: dict
    total: float

    def __post_init__(self):
        object.__setattr__(self, "plants", tuple(self.plants))

    def to_dict(self) -> dict:
        return {
            "delta_pp": self.delta_pp,
            "plants": [item.to_dict() for item in self.plants],
            "subtotals": {k: float(v) for k, v in self.subtotals.items()},
            "total": self.total,
            "bar_chart": {
                "countries": list(self.subtotals),
                "megatonnes": [float(v) / 1e6 for v in self.subtotals.values()],
            },
        }


def fleet_report(plants, delta_pp: float) -> CarbonReport:
    """Apply one efficiency gain across the fleet and aggregate by country.

    Countries are ordered by descending subtotal, ties by name.
    """
    plants = list(plants)
    if not plants:
        raise ValidationError("fleet must contain at least one plant")
    items = [
        PlantReduction(p.name, p.country, lifetime_reduction(p, delta_pp))
        for p in plants
    ]
    grouped: dict = {}
    for item in items:
        grouped.setdefault(item.country, []).append(item.tonnes)
    subtotal_pairs = sorted(
        ((country, sum(values)) for country, values in grouped.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    subtotals = dict(subtotal_pairs)
    total = sum(subtotals.values())
    return CarbonReport(
        delta_pp=float(delta_pp), plants=tuple(items), subtotals=subtotals, total=total
    )


@dataclass(frozen=True)
class FleetFile:
    """Parsed fleet configuration: plants plus display-only reference values."""

    plants: tuple[FleetPlant, ...]
    reference_subtotals_mt: dict
    reference_total_mt: float | None
    delta_pp_reference: float | None
    notes: str

    def __post_init__(self):
        object.__setattr__(self, "plants", tuple(self.plants))


def load_fleet(path: str | Path | None = None) -> FleetFile:
    """Load a fleet configuration file, defaulting to the packaged fleet."""
    if path is None:
        text = (
            resources.files("plantopt").joinpath("resources/fleet.json").read_text()
        )
    else:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"fleet file not found: {path}")
        text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"fleet file is not valid JSON: {exc}") from exc
    if doc.get("schema_version") != FLEET_SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported fleet schema_version {doc.get('schema_version')!r}"
        )
    records = doc.get("plants")
    if not isinstance(records, list) or not records:
        raise ValidationError("fleet file must list at least one plant")
    plants = tuple(FleetPlant.from_dict(record) for record in records)
    reference = doc.get("reference_subtotals_mt", {})
    if not isinstance(reference, dict):
        raise ValidationError("reference_subtotals_mt must be a mapping")
    total = doc.get("reference_total_mt")
    delta = doc.get("delta_pp_reference")
    return FleetFile(
        plants=plants,
        reference_subtotals_mt={k: float(v) for k, v in reference.items()},
        reference_total_mt=None if total is None else float(total),
        delta_pp_reference=None if delta is None else float(delta),
        notes=str(doc.get("notes", "")),
    )
