"""Monthly statistics and the five plain-text output writers.

The txt outputs carry no header, comma delimiters and '.' decimals; an
optional CSV mirror adds headers. File names embed the run's parameter
tuple so runs never clash.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .entities import Citizen, Firm, Region, family_total_savings

GENERAL_COLUMNS = [
    "month",
    "price_index",
    "gdp_index",
    "unemployment",
    "average_workers",
    "families_wealth",
    "families_savings",
    "firms_wealth",
    "firms_profit",
    "gini_index",
    "average_utility",
]

REGIONAL_COLUMNS = [
    "month",
    "region_id",
    "commuting",
    "pop",
    "gdp_region",
    "regional_gini",
    "regional_unemployment",
    "qli_index",
    "gdp_percapta",
    "treasure",
]

AGENT_COLUMNS = [
    "month",
    "region_id",
    "gender",
    "long",
    "lat",
    "id",
    "age",
    "qualification",
    "firm_id",
    "family_id",
    "utility",
    "distance",
]

FIRM_COLUMNS = [
    "month",
    "firm_id",
    "region_id",
    "long",
    "lat",
    "total_balance",
    "number_employees",
    "total_quantity_in_stock",
    "amount_produced",
    "price",
]

HOUSE_COLUMNS = [
    "month",
    "house_id",
    "long",
    "lat",
    "house_size",
    "house_price",
    "family_id",
    "family_savings",
    "region_id",
]

OUTPUT_KINDS = ("agent", "firm", "general", "house", "regional")

FILENAME_PARAM_FIELDS = [
    "SIZE_MARKET",
    "ALPHA",
    "BETA",
    "QUANTITY_TO_CHANGE_PRICES",
    "MARKUP",
    "LABOUR_MARKET",
    "CONSUMPTION_SATISFACTION",
    "PERCENTAGE_CHECK_NEW_LOCATION",
    "TAX_CONSUMPTION",
]


def average_price(firms: list[Firm]) -> float:
    """Unweighted mean product price across firms."""
    if not firms:
        return 0.0
    return sum(f.inventory.price for f in firms if f.inventory) / len(firms)


def region_gdp(firms: list[Firm], region_id: str) -> float:
    """Cumulative sold value of the region's firms, taxes included."""
    return sum(f.amount_sold for f in firms if f.region_id == region_id)


def gdp_per_capita(gdp: float, pop: int) -> float:
    return gdp / pop if pop > 0 else 0.0


def unemployment(citizens: list[Citizen]) -> float:
    """Unemployed share of the 16-to-69 workforce (0 when empty)."""
    workforce = [c for c in citizens if c.in_workforce()]
    if not workforce:
        return 0.0
    jobless = sum(1 for c in workforce if c.firm_id is None)
    return jobless / len(workforce)


def gini(values) -> float:
    """Gini index of non-negative values, via the sorted-rank identity."""
    data = sorted(float(v) for v in values)
    if any(v < 0 for v in data):
        raise ValueError("gini is undefined for negative values")
    n = len(data)
    if n < 2:
        return 0.0
    total = sum(data)
    if total <= 0.0:
        return 0.0
    acc = 0.0
    for i, v in enumerate(data, start=1):
        acc += (2 * i - n - 1) * v
    return acc / (n * total)


def commuting(citizens: list[Citizen], region_id: str) -> float:
    """Total commuting distance of the region's employed residents."""
    return sum(
        c.distance
        for c in citizens
        if c.region_id == region_id and c.firm_id is not None and c.distance is not None
    )


def average_workers(firms: list[Firm]) -> float:
    if not firms:
        return 0.0
    return sum(f.num_employees() for f in firms) / len(firms)


def family_average_utilities(state, region_id: str | None = None) -> list[float]:
    """Mean member utility per family, optionally within one region."""
    out = []
    for fid in sorted(state.families):
        family = state.families[fid]
        if not family.member_ids:
            continue
        if region_id is not None and family.region_id != region_id:
            continue
        members = state.members_of(family)
        out.append(sum(c.utility for c in members) / len(members))
    return out


def general_row(state, month: int) -> list:
    firms = [state.firms[fid] for fid in sorted(state.firms)]
    citizens = list(state.citizens.values())
    fam_utils = family_average_utilities(state)
    families_wealth = 0.0
    families_savings = 0.0
    for fid in sorted(state.families):
        family = state.families[fid]
        members = state.members_of(family)
        families_wealth += family.balance + sum(c.money + c.savings for c in members)
        families_savings += family_total_savings(family, members)
    return [
        month,
        average_price(firms),
        sum(region_gdp(firms, rid) for rid in sorted(state.regions)),
        unemployment(citizens),
        average_workers(firms),
        families_wealth,
        families_savings,
        sum(f.total_balance for f in firms),
        sum(f.profit for f in firms),
        gini(fam_utils),
        (sum(fam_utils) / len(fam_utils)) if fam_utils else 0.0,
    ]


def regional_rows(state, month: int) -> list[list]:
    firms = [state.firms[fid] for fid in sorted(state.firms)]
    rows = []
    pops = state.population_by_region()
    for rid in sorted(state.regions):
        region: Region = state.regions[rid]
        residents = [c for c in state.citizens.values() if c.region_id == rid]
        gdp = region_gdp(firms, rid)
        region.region_gdp = gdp
        region.total_commute = commuting(residents, rid)
        rows.append(
            [
                month,
                rid,
                region.total_commute,
                pops[rid],
                gdp,
                gini(family_average_utilities(state, rid)),
                unemployment(residents),
                region.index,
                gdp_per_capita(gdp, pops[rid]),
                region.treasure,
            ]
        )
    return rows


def agent_rows(state, month: int) -> list[list]:
    rows = []
    for cid in sorted(state.citizens):
        c = state.citizens[cid]
        rows.append(
            [
                month,
                c.region_id,
                c.gender,
                c.address.x,
                c.address.y,
                c.id,
                c.age,
                c.qualification,
                c.firm_id,
                c.family_id,
                c.utility,
                c.distance,
            ]
        )
    return rows


def firm_rows(state, month: int) -> list[list]:
    rows = []
    for fid in sorted(state.firms):
        f = state.firms[fid]
        rows.append(
            [
                month,
                f.firm_id,
                f.region_id,
                f.address.x,
                f.address.y,
                f.total_balance,
                f.num_employees(),
                f.inventory.quantity if f.inventory else 0.0,
                f.amount_produced,
                f.inventory.price if f.inventory else 0.0,
            ]
        )
    return rows


def house_rows(state, month: int) -> list[list]:
    rows = []
    for hid in sorted(state.houses):
        h = state.houses[hid]
        occupant = (
            state.families.get(h.occupant_family_id)
            if h.occupant_family_id is not None
            else None
        )
        savings = (
            family_total_savings(occupant, state.members_of(occupant))
            if occupant is not None
            else None
        )
        rows.append(
            [
                month,
                h.house_id,
                h.address.x,
                h.address.y,
                h.size,
                h.price,
                h.occupant_family_id,
                savings,
                h.region_id,
            ]
        )
    return rows


def _format_value(value) -> str:
    if value is None:
        return "None"
    return str(value)


def format_row(row) -> str:
    return ",".join(_format_value(v) for v in row)


def filename_param_tuple(params, total_pop: int) -> str:
    parts = [
        "None",
        str(params.alternative0),
        str(params.PERIODICITY_SAVE_DATA),
        str(params.TOTAL_DAYS),
        str(total_pop),
    ]
    parts += [str(getattr(params, name)) for name in FILENAME_PARAM_FIELDS]
    return "_".join(parts)


@dataclass
class OutputPaths:
    run_dir: str
    txt: dict
    csv: dict
    manifest: str


class OutputWriter:
    """Appends one month of rows at a time to the five output files."""

    def __init__(self, run_dir, params, total_pop: int, seed: int, extra_manifest=None):
        self.params = params
        self.total_pop = total_pop
        tag = filename_param_tuple(params, total_pop)
        self.paths = OutputPaths(
            run_dir=run_dir,
            txt={k: os.path.join(run_dir, f"temp_{k}_{tag}.txt") for k in OUTPUT_KINDS},
            csv={k: os.path.join(run_dir, f"temp_{k}_{tag}.csv") for k in OUTPUT_KINDS},
            manifest=os.path.join(run_dir, "manifest.json"),
        )
        try:
            os.makedirs(run_dir, exist_ok=True)
            self._txt = {k: open(p, "w", encoding="utf-8") for k, p in self.paths.txt.items()}
        except OSError as exc:
            raise RuntimeError(f"cannot write outputs under {run_dir}: {exc}") from exc
        self._csv = {}
        if params.create_csv_files:
            headers = {
                "agent": AGENT_COLUMNS,
                "firm": FIRM_COLUMNS,
                "general": GENERAL_COLUMNS,
                "house": HOUSE_COLUMNS,
                "regional": REGIONAL_COLUMNS,
            }
            for kind, path in self.paths.csv.items():
                fh = open(path, "w", encoding="utf-8")
                fh.write(",".join(headers[kind]) + "\n")
                self._csv[kind] = fh
        manifest = {
            "params": params.as_dict(),
            "seed": seed,
            "total_pop": total_pop,
            "schema": {
                "agent": AGENT_COLUMNS,
                "firm": FIRM_COLUMNS,
                "general": GENERAL_COLUMNS,
                "house": HOUSE_COLUMNS,
                "regional": REGIONAL_COLUMNS,
            },
        }
        if extra_manifest:
            manifest.update(extra_manifest)
        with open(self.paths.manifest, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

    def _write(self, kind: str, rows) -> None:
        for row in rows:
            line = format_row(row)
            self._txt[kind].write(line + "\n")
            if kind in self._csv:
                self._csv[kind].write(line + "\n")

    def _agent_data_due(self, month: int) -> bool:
        periodicity = self.params.PERIODICITY_SAVE_DATA
        if periodicity == "monthly":
            return True
        if periodicity == "quarterly":
            return month % 3 == 0
        if periodicity == "annually":
            return month % 12 == 0
        return False

    def emit(self, state, month: int) -> None:
        self._write("general", [general_row(state, month)])
        self._write("regional", regional_rows(state, month))
        if self._agent_data_due(month):
            self._write("agent", agent_rows(state, month))
            self._write("firm", firm_rows(state, month))
            self._write("house", house_rows(state, month))

    def close(self) -> None:
        for fh in self._txt.values():
            fh.close()
        for fh in self._csv.values():
            fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_output_file(path, columns) -> list[list[str]]:
    """Read a no-header txt output back into rows of strings."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise ValueError(f"{path}: expected {len(columns)} fields, got {len(parts)}")
            rows.append(parts)
    return rows


def read_general_series(path) -> dict[str, list[float]]:
    """General file as column series keyed by measure name."""
    rows = read_output_file(path, GENERAL_COLUMNS)
    series: dict[str, list[float]] = {name: [] for name in GENERAL_COLUMNS}
    for row in rows:
        for name, value in zip(GENERAL_COLUMNS, row):
            series[name].append(float(value))
    return series
