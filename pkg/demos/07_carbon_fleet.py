"""
What a fraction of a percentage point is worth in CO2
=====================================================

A small efficiency gain, applied across a fleet of supercritical
units, avoids a large amount of lifetime CO2. The packaged reference
fleet describes 56 units by country with their capacity factors,
emission factors, and remaining lives; the report reconciles
plant -> country -> total exactly, so no tonne is double counted.
"""
from plantopt import fleet_report, lifetime_reduction, load_fleet

fleet = load_fleet()
print(f"reference fleet: {len(fleet.plants)} units")
print(fleet.notes)

# a single unit first: the arithmetic is easy to follow end to end
unit = fleet.plants[0]
saved = lifetime_reduction(unit, delta_pp=fleet.delta_pp_reference)
print(
    f"\n{unit.name} ({unit.country}): {unit.capacity_mw:.0f} MW at CF {unit.capacity_factor}, "
    f"eta {unit.efficiency}, EF {unit.emission_factor} kg/kWh, "
    f"{unit.remaining_life_years} years left"
)
print(
    f"  +{fleet.delta_pp_reference} pp efficiency -> "
    f"{saved / 1e6:.3f} Mt avoided over its remaining life"
)

# now the whole fleet at the reference efficiency gain
report = fleet_report(fleet.plants, fleet.delta_pp_reference)
print(f"\nfleet total at +{report.delta_pp} pp: {report.total / 1e6:.1f} Mt CO2 avoided")
print(f"{'country':>10} {'computed':>10} {'reference':>10}")
for country, tonnes in report.subtotals.items():
    reference = fleet.reference_subtotals_mt.get(country)
    ref_text = f"{reference:10.1f}" if reference is not None else " " * 10
    print(f"{country:>10} {tonnes / 1e6:10.2f} {ref_text}")
print(f"{'total':>10} {report.total / 1e6:10.2f} {fleet.reference_total_mt:10.1f}")
print("(reference column: published tallies for a comparable fleet, shown for context)")

# sensitivity: the avoided tonnage grows with the efficiency gain
print("\nsensitivity to the efficiency gain:")
for delta in (0.2, 0.4, 0.64, 1.0):
    total = fleet_report(fleet.plants, delta).total
    bar = "#" * int(round(total / 1e6 / 10))
    print(f"  +{delta:4.2f} pp  {total / 1e6:6.1f} Mt  {bar}")
