"""Input ingestion and the built-in synthetic dataset.

Real inputs are a GeoJSON FeatureCollection of region boundaries (plus an
optional urban-zones file) and five CSVs: population, mortality, fertility,
hdi and firms. The synthetic dataset ships two rectangular municipalities
with square urban cores so everything runs with zero downloads.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

from .demographics import VitalTables
from .genesis import GenesisError, PopulationTable
from .geo import RegionBoundary, load_boundaries

POPULATION_CSV = "population.csv"
MORTALITY_CSV = "mortality.csv"
FERTILITY_CSV = "fertility.csv"
HDI_CSV = "hdi.csv"
FIRMS_CSV = "firms.csv"
QUALIFICATION_CSV = "qualification.csv"
BOUNDARIES_GEOJSON = "boundaries.geojson"
URBAN_GEOJSON = "urban.geojson"


class DataError(ValueError):
    pass


@dataclass
class InputTables:
    boundaries: list[RegionBoundary] = field(default_factory=list)
    population: PopulationTable = field(default_factory=PopulationTable)
    vitals: VitalTables = field(default_factory=VitalTables)
    hdi: dict[str, float] = field(default_factory=dict)
    firm_counts: dict[str, float] = field(default_factory=dict)
    qualifications: dict[str, tuple[list[float], list[float]]] = field(default_factory=dict)


def _read_csv(path, columns) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != list(columns):
            raise DataError(
                f"{path}: expected header {','.join(columns)}, got "
                f"{','.join(reader.fieldnames or [])}"
            )
        return [row for row in reader]


def load_data_dir(path) -> InputTables:
    """Load every documented input file from a directory."""
    boundaries_path = os.path.join(path, BOUNDARIES_GEOJSON)
    if not os.path.exists(boundaries_path):
        raise DataError(f"missing {BOUNDARIES_GEOJSON} in {path}")
    urban_path = os.path.join(path, URBAN_GEOJSON)
    boundaries = load_boundaries(
        boundaries_path, urban_path if os.path.exists(urban_path) else None
    )

    pop_rows = []
    for row in _read_csv(os.path.join(path, POPULATION_CSV), ["region_id", "age_low", "age_high", "gender", "count"]):
        pop_rows.append(
            (
                row["region_id"],
                int(row["age_low"]),
                int(row["age_high"]),
                row["gender"],
                float(row["count"]),
            )
        )

    mortality = {}
    for row in _read_csv(os.path.join(path, MORTALITY_CSV), ["year", "gender", "age", "prob"]):
        mortality[(int(row["year"]), row["gender"], int(row["age"]))] = float(row["prob"])
    fertility = {}
    for row in _read_csv(os.path.join(path, FERTILITY_CSV), ["year", "age", "prob"]):
        fertility[(int(row["year"]), int(row["age"]))] = float(row["prob"])

    hdi = {}
    for row in _read_csv(os.path.join(path, HDI_CSV), ["region_id", "hdi2000"]):
        hdi[row["region_id"]] = float(row["hdi2000"])
    firm_counts = {}
    for row in _read_csv(os.path.join(path, FIRMS_CSV), ["region_id", "count"]):
        firm_counts[row["region_id"]] = float(row["count"])

    qualifications: dict[str, tuple[list[float], list[float]]] = {}
    qual_path = os.path.join(path, QUALIFICATION_CSV)
    if os.path.exists(qual_path):
        raw: dict[str, list[tuple[float, float]]] = {}
        for row in _read_csv(qual_path, ["region_id", "years", "share"]):
            raw.setdefault(row["region_id"], []).append(
                (float(row["years"]), float(row["share"]))
            )
        for region_id, pairs in raw.items():
            values = [v for v, _ in pairs]
            weights = [w for _, w in pairs]
            total = sum(weights)
            if total <= 0:
                raise DataError(f"qualification shares for {region_id} sum to zero")
            qualifications[region_id] = (values, [w / total for w in weights])

    return InputTables(
        boundaries=boundaries,
        population=PopulationTable(rows=pop_rows),
        vitals=VitalTables(mortality=mortality, fertility=fertility),
        hdi=hdi,
        firm_counts=firm_counts,
        qualifications=qualifications,
    )


def validate_data_dir(path) -> list[str]:
    """Schema-check a data directory; returns a list of problems."""
    problems = []
    try:
        tables = load_data_dir(path)
    except (DataError, GenesisError, OSError, ValueError) as exc:
        return [str(exc)]
    region_ids = {b.region_id for b in tables.boundaries}
    for rid in tables.population.region_ids():
        if rid not in region_ids:
            problems.append(f"population.csv references unknown region {rid}")
    for rid in region_ids:
        if rid not in tables.hdi and not any(
            b.region_id == rid and b.hdi is not None for b in tables.boundaries
        ):
            problems.append(f"no HDI for region {rid}")
    for key, prob in tables.vitals.mortality.items():
        if not 0.0 <= prob <= 1.0:
            problems.append(f"mortality prob out of [0,1] at {key}")
            break
    for key, prob in tables.vitals.fertility.items():
        if not 0.0 <= prob <= 1.0:
            problems.append(f"fertility prob out of [0,1] at {key}")
            break
    for rid, count in tables.firm_counts.items():
        if count < 0:
            problems.append(f"negative firm count for {rid}")
    for boundary in tables.boundaries:
        minx, miny, maxx, maxy = boundary.envelope
        for polygon in boundary.urban_zones:
            from .geo import envelope as poly_envelope

            ux0, uy0, ux1, uy1 = poly_envelope(polygon)
            if ux1 < minx or ux0 > maxx or uy1 < miny or uy0 > maxy:
                problems.append(
                    f"urban zone of {boundary.region_id} lies outside its boundary"
                )
                break
    return problems


# --- synthetic dataset ------------------------------------------------------

def _rect(x0, y0, x1, y1):
    return [[(x0, y0), (x1, y0), (x1, y1), (x0, y1)]]


def synthetic_boundaries(equal_hdi: bool = False) -> list[RegionBoundary]:
    """Two rectangular municipalities, each with a square urban core."""
    hdi_b = 0.7 if equal_hdi else 0.6
    return [
        RegionBoundary(
            region_id="RA",
            name="Alta",
            outer=[_rect(0.0, 0.0, 10.0, 10.0)],
            urban_zones=[_rect(4.0, 4.0, 6.0, 6.0)],
            hdi=0.7,
            acp_id="ACP1",
            urban_share=0.7,
        ),
        RegionBoundary(
            region_id="RB",
            name="Baixa",
            outer=[_rect(10.0, 0.0, 20.0, 10.0)],
            urban_zones=[_rect(13.0, 3.0, 16.0, 6.0)],
            hdi=hdi_b,
            acp_id="ACP1",
            urban_share=0.6,
        ),
    ]


def synthetic_population() -> PopulationTable:
    """Roughly 20,000 inhabitants so the default 1% fraction yields ~200."""
    rows = []
    brackets = [(0, 15), (16, 29), (30, 49), (50, 69), (70, 100)]
    counts_a = [2000, 1500, 1500, 800, 200]
    counts_b = [1333, 1000, 1000, 534, 134]
    counts_b_f = [1333, 1000, 1000, 533, 133]
    for (lo, hi), n in zip(brackets, counts_a):
        rows.append(("RA", lo, hi, "male", float(n)))
        rows.append(("RA", lo, hi, "female", float(n)))
    for (lo, hi), nm, nf in zip(brackets, counts_b, counts_b_f):
        rows.append(("RB", lo, hi, "male", float(nm)))
        rows.append(("RB", lo, hi, "female", float(nf)))
    return PopulationTable(rows=rows)


def synthetic_vitals(years=range(2000, 2041), static_population: bool = False) -> VitalTables:
    """Flat, mildly age-dependent annual rates; zeroed when a perfectly
    static population is requested."""
    mortality = {}
    fertility = {}
    for year in years:
        for gender in ("male", "female"):
            for age in range(0, 121):
                if static_population:
                    prob = 0.0
                elif age < 60:
                    prob = 0.003
                elif age < 80:
                    prob = 0.02
                else:
                    prob = 0.1
                mortality[(year, gender, age)] = prob
        for age in range(15, 50):
            fertility[(year, age)] = 0.0 if static_population else 0.05
    return VitalTables(mortality=mortality, fertility=fertility)


def synthetic_inputs(equal_hdi: bool = False, static_population: bool = False) -> InputTables:
    return InputTables(
        boundaries=synthetic_boundaries(equal_hdi=equal_hdi),
        population=synthetic_population(),
        vitals=synthetic_vitals(static_population=static_population),
        hdi={"RA": 0.7, "RB": 0.7 if equal_hdi else 0.6},
        firm_counts={"RA": 600.0, "RB": 400.0},
    )


def write_synthetic_data_dir(path, equal_hdi: bool = False, static_population: bool = False) -> None:
    """Materialize the synthetic dataset as the documented files."""
    os.makedirs(path, exist_ok=True)
    tables = synthetic_inputs(equal_hdi=equal_hdi, static_population=static_population)

    features = []
    urban_features = []
    for b in tables.boundaries:
        features.append(
            {
                "type": "Feature",
                "properties": {
                    "region_id": b.region_id,
                    "name": b.name,
                    "hdi2000": b.hdi,
                    "acp_id": b.acp_id,
                    "urban_prop": b.urban_share,
                },
                "geometry": {
                    "type": "MultiPolygon",
                    "coordinates": [[list(map(list, ring)) for ring in poly] for poly in b.outer],
                },
            }
        )
        for poly in b.urban_zones:
            urban_features.append(
                {
                    "type": "Feature",
                    "properties": {"region_id": b.region_id},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [list(map(list, ring)) for ring in poly],
                    },
                }
            )
    with open(os.path.join(path, BOUNDARIES_GEOJSON), "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)
    with open(os.path.join(path, URBAN_GEOJSON), "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": urban_features}, fh)

    def dump(name, header, rows):
        with open(os.path.join(path, name), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    dump(
        POPULATION_CSV,
        ["region_id", "age_low", "age_high", "gender", "count"],
        tables.population.rows,
    )
    dump(
        MORTALITY_CSV,
        ["year", "gender", "age", "prob"],
        [(y, g, a, p) for (y, g, a), p in sorted(tables.vitals.mortality.items())],
    )
    dump(
        FERTILITY_CSV,
        ["year", "age", "prob"],
        [(y, a, p) for (y, a), p in sorted(tables.vitals.fertility.items())],
    )
    dump(HDI_CSV, ["region_id", "hdi2000"], sorted(tables.hdi.items()))
    dump(FIRMS_CSV, ["region_id", "count"], sorted(tables.firm_counts.items()))
