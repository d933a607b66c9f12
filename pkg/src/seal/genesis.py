"""World generation: regions, citizens, families, households and firms.

Builds the starting population from ingested tables (or the synthetic
fixtures in `data`), allocates everyone in space honouring each region's
urban/rural split, and persists the result as a portable snapshot so
repeated experiments skip regeneration. Generation is a pure function of
(input tables, config, seed).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .demographics import draw_qualification
from .entities import Citizen, Family, Firm, Household, Product, Region, reprice_house
from .geo import Point, RegionBoundary

SNAPSHOT_MAGIC = "seal-snap"
SNAPSHOT_VERSION = 1
SNAPSHOT_EXTENSION = ".seal-snap"


class GenesisError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


@dataclass
class PopulationTable:
    """Counts per (region_id, age_low, age_high, gender)."""

    rows: list[tuple[str, int, int, str, float]] = field(default_factory=list)

    def region_ids(self) -> list[str]:
        return sorted({r[0] for r in self.rows})

    def for_region(self, region_id: str) -> list[tuple[int, int, str, float]]:
        picked = [(lo, hi, g, n) for rid, lo, hi, g, n in self.rows if rid == region_id]
        return sorted(picked, key=lambda r: (r[0], r[1], r[2]))

    def total(self, region_id: str | None = None) -> float:
        return sum(
            n for rid, _, _, _, n in self.rows if region_id is None or rid == region_id
        )


@dataclass
class GenesisConfig:
    percentage_actual_pop: float = 0.01
    simplify_pop_evolution: bool = False
    list_new_age_groups: tuple[int, ...] = (6, 12, 17, 25, 35, 45, 65, 100)
    members_per_family: float = 2.5
    house_vacancy: float = 0.10
    firm_initial_cash: float = 100.0
    seed: int = 0

    @classmethod
    def from_params(cls, params) -> "GenesisConfig":
        return cls(
            percentage_actual_pop=params.PERCENTAGE_ACTUAL_POP,
            simplify_pop_evolution=params.SIMPLIFY_POP_EVOLUTION,
            list_new_age_groups=tuple(params.LIST_NEW_AGE_GROUPS),
            members_per_family=params.MEMBERS_PER_FAMILY,
            house_vacancy=params.HOUSE_VACANCY,
            firm_initial_cash=params.FIRM_INITIAL_CASH,
            seed=params.seed,
        )

    def validate(self):
        groups = tuple(self.list_new_age_groups)
        if not groups or list(groups) != sorted(set(groups)) or groups[-1] != 100:
            raise GenesisError("list_new_age_groups must be strictly increasing, ending at 100")
        if not 0.0 < self.percentage_actual_pop <= 1.0:
            raise GenesisError("percentage_actual_pop must be in (0, 1]")

    def digest(self) -> str:
        payload = json.dumps(
            {
                "percentage_actual_pop": self.percentage_actual_pop,
                "simplify_pop_evolution": self.simplify_pop_evolution,
                "list_new_age_groups": list(self.list_new_age_groups),
                "members_per_family": self.members_per_family,
                "house_vacancy": self.house_vacancy,
                "firm_initial_cash": self.firm_initial_cash,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class World:
    regions: dict[str, Region] = field(default_factory=dict)
    citizens: dict[int, Citizen] = field(default_factory=dict)
    families: dict[int, Family] = field(default_factory=dict)
    houses: dict[int, Household] = field(default_factory=dict)
    firms: dict[int, Firm] = field(default_factory=dict)
    seed: int = 0
    config_digest: str = ""

    @property
    def total_pop(self) -> int:
        return len(self.citizens)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def create_regions(boundaries: list[RegionBoundary], hdi_table: dict[str, float]) -> dict[str, Region]:
    regions: dict[str, Region] = {}
    for boundary in sorted(boundaries, key=lambda b: b.region_id):
        hdi = hdi_table.get(boundary.region_id)
        if hdi is None:
            raise GenesisError(f"no HDI for {boundary.region_id}")
        if not 0.0 < hdi <= 1.0:
            raise GenesisError(f"HDI for {boundary.region_id} must be in (0, 1], got {hdi}")
        regions[boundary.region_id] = Region(
            region_id=boundary.region_id,
            name=boundary.name,
            boundary=boundary,
            index=float(hdi),
        )
    return regions


def simplify_population(pop: PopulationTable, list_new_age_groups) -> PopulationTable:
    """Re-bucket counts into coarse age groups, preserving totals."""
    uppers = list(list_new_age_groups)
    brackets = []
    low = 0
    for up in uppers:
        brackets.append((low, up))
        low = up + 1
    merged: dict[tuple[str, int, int, str], float] = {}
    for rid, lo, hi, gender, count in pop.rows:
        mid = (lo + hi) / 2.0
        for blo, bhi in brackets:
            if blo <= mid <= bhi:
                merged[(rid, blo, bhi, gender)] = merged.get((rid, blo, bhi, gender), 0.0) + count
                break
    rows = [(rid, lo, hi, g, n) for (rid, lo, hi, g), n in sorted(merged.items())]
    return PopulationTable(rows=rows)


def create_citizens(
    pop: PopulationTable,
    cfg: GenesisConfig,
    rng,
    qualification_tables: dict | None = None,
    start_id: int = 0,
) -> dict[int, Citizen]:
    """Scale table counts down by the population fraction and instantiate.

    Within every bracket genders alternate so ids interleave; each citizen
    draws an age inside the bracket, a birth month, starting money in
    (20, 40) and a fixed qualification.
    """
    qualification_tables = qualification_tables or {}
    citizens: dict[int, Citizen] = {}
    next_id = start_id
    for region_id in pop.region_ids():
        brackets: dict[tuple[int, int], dict[str, int]] = {}
        for lo, hi, gender, count in pop.for_region(region_id):
            scaled = _round_half_up(count * cfg.percentage_actual_pop)
            bucket = brackets.setdefault((lo, hi), {})
            bucket[gender] = bucket.get(gender, 0) + scaled
        qual_table = qualification_tables.get(region_id)
        for (lo, hi), per_gender in sorted(brackets.items()):
            n_male = per_gender.get("male", 0)
            n_female = per_gender.get("female", 0)
            for i in range(max(n_male, n_female)):
                for gender, limit in (("male", n_male), ("female", n_female)):
                    if i >= limit:
                        continue
                    citizens[next_id] = Citizen(
                        id=next_id,
                        gender=gender,
                        month_of_birth=int(rng.integers(1, 13)),
                        age=int(rng.integers(lo, hi + 1)),
                        qualification=draw_qualification(rng, qual_table),
                        money=float(rng.uniform(20.0, 40.0)),
                        region_id=region_id,
                        family_id=-1,
                    )
                    next_id += 1
    if not citizens:
        raise GenesisError("population fraction too small: no citizens created")
    return citizens


def create_families_and_allocate(
    citizens: dict[int, Citizen], cfg: GenesisConfig, rng, start_id: int = 0
) -> dict[int, Family]:
    """Create ceil(n / members_per_family) families per region and fill them
    by repeatedly drawing a random (family, unassigned citizen) pair."""
    families: dict[int, Family] = {}
    next_id = start_id
    by_region: dict[str, list[int]] = {}
    for cid in sorted(citizens):
        by_region.setdefault(citizens[cid].region_id, []).append(cid)
    for region_id in sorted(by_region):
        ids = by_region[region_id]
        n_families = math.ceil(len(ids) / cfg.members_per_family)
        region_families = []
        for _ in range(n_families):
            family = Family(id=next_id, region_id=region_id)
            families[next_id] = family
            region_families.append(family)
            next_id += 1
        unassigned = list(ids)
        while unassigned:
            family = region_families[int(rng.integers(0, len(region_families)))]
            pick = int(rng.integers(0, len(unassigned)))
            cid = unassigned.pop(pick)
            family.member_ids.add(cid)
            citizens[cid].family_id = family.id
    return families


def _sample_address(boundary: RegionBoundary, rng) -> Point:
    """Urban with the region's urban probability, rural otherwise."""
    urban_prob = boundary.urban_probability()
    if not boundary.urban_zones:
        return boundary.sample_point(rng, urban=None)
    urban = bool(rng.random() < urban_prob)
    return boundary.sample_point(rng, urban=urban)


def create_households_and_allocate(
    families: dict[int, Family],
    citizens: dict[int, Citizen],
    region: Region,
    cfg: GenesisConfig,
    rng,
    start_id: int = 0,
) -> dict[int, Household]:
    """Build the region's housing stock and seat every non-empty family.

    House count exceeds family count by the vacancy margin; each family
    owns the house it occupies, and leftover empty houses are raffled
    among all of the region's families.
    """
    region_families = [families[fid] for fid in sorted(families) if families[fid].region_id == region.region_id]
    houses: dict[int, Household] = {}
    if not region_families:
        return houses
    if region.boundary.area() <= 0.0:
        raise GenesisError(f"region {region.region_id} has a zero-area boundary")
    n_houses = math.ceil(len(region_families) * (1.0 + cfg.house_vacancy))
    next_id = start_id
    for _ in range(n_houses):
        house = Household(
            house_id=next_id,
            address=_sample_address(region.boundary, rng),
            size=float(rng.uniform(20.0, 120.0)),
            quality=int(rng.integers(1, 5)),
            region_id=region.region_id,
            owner_family_id=-1,
        )
        reprice_house(house, region.index)
        houses[next_id] = house
        next_id += 1

    available = sorted(houses)
    for family in region_families:
        if not family.member_ids:
            continue
        pick = int(rng.integers(0, len(available)))
        hid = available.pop(pick)
        house = houses[hid]
        house.occupant_family_id = family.id
        house.owner_family_id = family.id
        family.household_id = hid
        family.owned_house_ids.add(hid)
        family.address = house.address
        for cid in sorted(family.member_ids):
            citizens[cid].address = house.address
    for hid in available:
        family = region_families[int(rng.integers(0, len(region_families)))]
        houses[hid].owner_family_id = family.id
        family.owned_house_ids.add(hid)
    return houses


def create_firms(
    firm_count_table: dict[str, float],
    regions: dict[str, Region],
    cfg: GenesisConfig,
    rng,
    start_id: int = 0,
) -> dict[int, Firm]:
    """Scale the per-region firm counts and place each firm in space with
    a small opening cash balance and one product priced at 1."""
    firms: dict[int, Firm] = {}
    next_id = start_id
    for region_id in sorted(regions):
        count = firm_count_table.get(region_id, 0)
        scaled = _round_half_up(count * cfg.percentage_actual_pop)
        if count > 0:
            scaled = max(1, scaled)
        for _ in range(scaled):
            firms[next_id] = Firm(
                firm_id=next_id,
                address=_sample_address(regions[region_id].boundary, rng),
                region_id=region_id,
                total_balance=cfg.firm_initial_cash,
                last_qtr_balance=cfg.firm_initial_cash,
                inventory=Product(product_id=0, price=1.0, quantity=0.0),
            )
            next_id += 1
    return firms


def generate_world(tables, cfg: GenesisConfig) -> World:
    """Instantiate the whole starting state from ingested tables."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    hdi = dict(tables.hdi)
    for boundary in tables.boundaries:
        if boundary.region_id not in hdi and boundary.hdi is not None:
            hdi[boundary.region_id] = boundary.hdi
    regions = create_regions(tables.boundaries, hdi)
    pop = tables.population
    if cfg.simplify_pop_evolution:
        pop = simplify_population(pop, cfg.list_new_age_groups)
    citizens = create_citizens(pop, cfg, rng, tables.qualifications)
    families = create_families_and_allocate(citizens, cfg, rng)
    houses: dict[int, Household] = {}
    for region_id in sorted(regions):
        new = create_households_and_allocate(
            families, citizens, regions[region_id], cfg, rng, start_id=len(houses)
        )
        houses.update(new)
    firms = create_firms(tables.firm_counts, regions, cfg, rng)
    for region in regions.values():
        region.pop = sum(1 for c in citizens.values() if c.region_id == region.region_id)
    return World(
        regions=regions,
        citizens=citizens,
        families=families,
        houses=houses,
        firms=firms,
        seed=cfg.seed,
        config_digest=cfg.digest(),
    )


# --- snapshot persistence -------------------------------------------------

def _point(p) -> list[float] | None:
    return None if p is None else [p[0], p[1]]


def _boundary_record(b: RegionBoundary) -> dict:
    return {
        "region_id": b.region_id,
        "name": b.name,
        "outer": b.outer,
        "urban_zones": b.urban_zones,
        "hdi": b.hdi,
        "acp_id": b.acp_id,
        "urban_share": b.urban_share,
    }


def world_records(world) -> list[dict]:
    """Type-tagged entity records, in a canonical order."""
    records: list[dict] = []
    for rid in sorted(world.regions):
        r = world.regions[rid]
        records.append(
            {
                "t": "region",
                "region_id": r.region_id,
                "name": r.name,
                "boundary": _boundary_record(r.boundary),
                "index": r.index,
                "treasure": r.treasure,
                "pop": r.pop,
                "fiscal_cluster": r.fiscal_cluster,
            }
        )
    for cid in sorted(world.citizens):
        c = world.citizens[cid]
        records.append(
            {
                "t": "citizen",
                "id": c.id,
                "gender": c.gender,
                "month_of_birth": c.month_of_birth,
                "age": c.age,
                "qualification": c.qualification,
                "money": c.money,
                "savings": c.savings,
                "firm_id": c.firm_id,
                "utility": c.utility,
                "address": _point(c.address),
                "distance": c.distance,
                "region_id": c.region_id,
                "family_id": c.family_id,
            }
        )
    for fid in sorted(world.families):
        f = world.families[fid]
        records.append(
            {
                "t": "family",
                "id": f.id,
                "region_id": f.region_id,
                "member_ids": sorted(f.member_ids),
                "balance": f.balance,
                "savings": f.savings,
                "household_id": f.household_id,
                "owned_house_ids": sorted(f.owned_house_ids),
                "address": _point(f.address),
            }
        )
    for hid in sorted(world.houses):
        h = world.houses[hid]
        records.append(
            {
                "t": "house",
                "house_id": h.house_id,
                "address": _point(h.address),
                "size": h.size,
                "quality": h.quality,
                "region_id": h.region_id,
                "price": h.price,
                "occupant_family_id": h.occupant_family_id,
                "owner_family_id": h.owner_family_id,
            }
        )
    for fid in sorted(world.firms):
        f = world.firms[fid]
        records.append(
            {
                "t": "firm",
                "firm_id": f.firm_id,
                "address": _point(f.address),
                "region_id": f.region_id,
                "total_balance": f.total_balance,
                "last_qtr_balance": f.last_qtr_balance,
                "profit": f.profit,
                "employee_ids": sorted(f.employee_ids),
                "product": None
                if f.inventory is None
                else {
                    "product_id": f.inventory.product_id,
                    "price": f.inventory.price,
                    "quantity": f.inventory.quantity,
                },
                "amount_sold": f.amount_sold,
                "amount_produced": f.amount_produced,
            }
        )
    return records


def snapshot_save(world, path) -> None:
    records = world_records(world)
    counts: dict[str, int] = {}
    for record in records:
        counts[record["t"]] = counts.get(record["t"], 0) + 1
    manifest = {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "seed": world.seed,
        "config_digest": world.config_digest,
        "counts": counts,
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    os.replace(tmp, path)


def snapshot_load(path) -> World:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SnapshotError(f"{path}: empty snapshot")
    try:
        manifest = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"{path}: corrupt snapshot header: {exc}") from exc
    if manifest.get("magic") != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path}: not a snapshot file")
    if manifest.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"{path}: snapshot version {manifest.get('version')} unsupported"
        )
    world = World(seed=manifest.get("seed", 0), config_digest=manifest.get("config_digest", ""))
    counts: dict[str, int] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"{path}: corrupt record: {exc}") from exc
        kind = record.get("t")
        counts[kind] = counts.get(kind, 0) + 1
        if kind == "region":
            b = record["boundary"]
            boundary = RegionBoundary(
                region_id=b["region_id"],
                name=b["name"],
                outer=b["outer"],
                urban_zones=b["urban_zones"],
                hdi=b["hdi"],
                acp_id=b["acp_id"],
                urban_share=b["urban_share"],
            )
            world.regions[record["region_id"]] = Region(
                region_id=record["region_id"],
                name=record["name"],
                boundary=boundary,
                index=record["index"],
                treasure=record["treasure"],
                pop=record["pop"],
                fiscal_cluster=record["fiscal_cluster"],
            )
        elif kind == "citizen":
            world.citizens[record["id"]] = Citizen(
                id=record["id"],
                gender=record["gender"],
                month_of_birth=record["month_of_birth"],
                age=record["age"],
                qualification=record["qualification"],
                money=record["money"],
                savings=record["savings"],
                firm_id=record["firm_id"],
                utility=record["utility"],
                address=Point(*record["address"]),
                distance=record["distance"],
                region_id=record["region_id"],
                family_id=record["family_id"],
            )
        elif kind == "family":
            world.families[record["id"]] = Family(
                id=record["id"],
                region_id=record["region_id"],
                member_ids=set(record["member_ids"]),
                balance=record["balance"],
                savings=record["savings"],
                household_id=record["household_id"],
                owned_house_ids=set(record["owned_house_ids"]),
                address=None if record["address"] is None else Point(*record["address"]),
            )
        elif kind == "house":
            world.houses[record["house_id"]] = Household(
                house_id=record["house_id"],
                address=Point(*record["address"]),
                size=record["size"],
                quality=record["quality"],
                region_id=record["region_id"],
                price=record["price"],
                occupant_family_id=record["occupant_family_id"],
                owner_family_id=record["owner_family_id"],
            )
        elif kind == "firm":
            product = record["product"]
            world.firms[record["firm_id"]] = Firm(
                firm_id=record["firm_id"],
                address=Point(*record["address"]),
                region_id=record["region_id"],
                total_balance=record["total_balance"],
                last_qtr_balance=record["last_qtr_balance"],
                profit=record["profit"],
                employee_ids=set(record["employee_ids"]),
                inventory=None
                if product is None
                else Product(
                    product_id=product["product_id"],
                    price=product["price"],
                    quantity=product["quantity"],
                ),
                amount_sold=record["amount_sold"],
                amount_produced=record["amount_produced"],
            )
        else:
            raise SnapshotError(f"{path}: unknown record type {kind!r}")
    expected = manifest.get("counts", {})
    if counts != expected:
        raise SnapshotError(
            f"{path}: truncated snapshot: found {counts}, manifest says {expected}"
        )
    return world


def snapshot_bytes(world) -> bytes:
    """Canonical serialization, used for digests and byte-identity checks."""
    lines = [json.dumps(r, sort_keys=True) for r in world_records(world)]
    return ("\n".join(lines) + "\n").encode()


def state_digest(world) -> str:
    return hashlib.sha256(snapshot_bytes(world)).hexdigest()


def snapshot_cache_name(region_ids, percentage_actual_pop: float, seed: int) -> str:
    key = hashlib.sha256(",".join(sorted(region_ids)).encode()).hexdigest()[:12]
    return f"genesis_{key}_p{percentage_actual_pop:g}_s{seed}{SNAPSHOT_EXTENSION}"


def ensure_snapshot(tables, cfg: GenesisConfig, cache_dir) -> tuple[World, str, bool]:
    """Load the cached snapshot for (regions, fraction, seed) or generate it.

    Returns (world, path, regenerated).
    """
    os.makedirs(cache_dir, exist_ok=True)
    name = snapshot_cache_name(
        [b.region_id for b in tables.boundaries], cfg.percentage_actual_pop, cfg.seed
    )
    path = os.path.join(cache_dir, name)
    if os.path.exists(path):
        return snapshot_load(path), path, False
    world = generate_world(tables, cfg)
    snapshot_save(world, path)
    return world, path, True
