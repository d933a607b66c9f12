"""Time control: days, the fixed monthly step sequence, and bootstrap.

A month is 21 working days. Every day firms produce; at each month
boundary the eleven-step monthly sequence runs: record, demographics,
payroll, family cash pooling, consumption, tax ledger close, fiscal
spending, pricing, labor market, real-estate market, statistics.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from . import markets
from .demographics import VitalTables, check_demographics
from .entities import (
    Citizen,
    Family,
    Firm,
    Household,
    Product,
    Region,
    pay_salaries,
    pool_and_split,
    produce,
    quality_of_life_update,
    quarterly_rebase,
    update_prices,
)

DAYS_PER_MONTH = 21

MONTH_STEPS = (
    "record_month",
    "demographics",
    "salaries",
    "pool_cash",
    "consume",
    "collect_taxes",
    "fiscal_spend",
    "update_prices",
    "labor_market",
    "real_estate",
    "statistics",
)


class SimulationError(RuntimeError):
    pass


class ConsistencyError(SimulationError):
    """A cross-registry backlink went stale."""


class ConservationError(SimulationError):
    """Money appeared or vanished outside the fiscal sink."""


@dataclass
class Clock:
    year_to_start: int = 2000
    day: int = 0

    @property
    def month_index(self) -> int:
        return self.day // DAYS_PER_MONTH

    @property
    def calendar_month(self) -> int:
        return self.month_index % 12 + 1

    @property
    def year(self) -> int:
        return self.year_to_start + self.month_index // 12

    @property
    def quarter(self) -> int:
        return self.month_index // 3


@dataclass
class SimulationState:
    params: object
    clock: Clock
    rng: np.random.Generator
    regions: dict[str, Region] = field(default_factory=dict)
    citizens: dict[int, Citizen] = field(default_factory=dict)
    families: dict[int, Family] = field(default_factory=dict)
    houses: dict[int, Household] = field(default_factory=dict)
    firms: dict[int, Firm] = field(default_factory=dict)
    graveyard: list[Citizen] = field(default_factory=list)
    vitals: VitalTables = field(default_factory=VitalTables)
    qualification_tables: dict = field(default_factory=dict)
    next_citizen_id: int = 0
    bootstrapped: bool = False
    month_log: list[int] = field(default_factory=list)
    cluster_pop_prev: dict[str, int] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def members_of(self, family: Family) -> list[Citizen]:
        return [self.citizens[cid] for cid in sorted(family.member_ids)]

    def employees_of(self, firm: Firm) -> list[Citizen]:
        return [self.citizens[cid] for cid in sorted(firm.employee_ids)]

    def population_by_region(self) -> dict[str, int]:
        counts = {rid: 0 for rid in self.regions}
        for citizen in self.citizens.values():
            counts[citizen.region_id] += 1
        return counts

    def clusters(self) -> dict[str, list[Region]]:
        grouped: dict[str, list[Region]] = {}
        for rid in sorted(self.regions):
            region = self.regions[rid]
            grouped.setdefault(region.fiscal_cluster, []).append(region)
        return grouped

    def total_wealth(self) -> float:
        """Every currency store in the model; fiscal spending is the only sink."""
        total = 0.0
        for c in self.citizens.values():
            total += c.money + c.savings
        for f in self.families.values():
            total += f.balance + f.savings
        for firm in self.firms.values():
            total += firm.total_balance
        for region in self.regions.values():
            total += region.treasure
        return total


def build_state(world, params, vitals: VitalTables, qualification_tables=None) -> SimulationState:
    """Assemble a runnable state from a generated world.

    The world is copied so one snapshot can seed many runs. With the
    alternative0 switch off, regions are folded into their population
    concentration area: one fiscal cluster sharing a treasury and a
    population-weighted quality-of-life index.
    """
    state = SimulationState(
        params=params,
        clock=Clock(year_to_start=params.YEAR_TO_START),
        rng=np.random.default_rng(params.seed),
        regions=copy.deepcopy(world.regions),
        citizens=copy.deepcopy(world.citizens),
        families=copy.deepcopy(world.families),
        houses=copy.deepcopy(world.houses),
        firms=copy.deepcopy(world.firms),
        vitals=vitals,
        qualification_tables=qualification_tables or {},
        next_citizen_id=(max(world.citizens) + 1) if world.citizens else 0,
    )
    if not params.alternative0:
        for region in state.regions.values():
            acp = region.boundary.acp_id
            if acp is None:
                raise SimulationError(
                    f"region {region.region_id} carries no acp_id; cannot merge clusters"
                )
            region.fiscal_cluster = acp
    pops = state.population_by_region()
    for region in state.regions.values():
        region.pop = pops[region.region_id]
    for cluster_id, members in state.clusters().items():
        cluster_pop = sum(pops[r.region_id] for r in members)
        state.cluster_pop_prev[cluster_id] = cluster_pop
        if len(members) > 1:
            indexes = {r.index for r in members}
            if len(indexes) == 1:
                shared = members[0].index  # already equal; keep it bit-exact
            elif cluster_pop > 0:
                shared = sum(r.index * pops[r.region_id] for r in members) / cluster_pop
            else:
                shared = members[0].index
            for region in members:
                region.index = shared
    return state


def bootstrap(state: SimulationState) -> SimulationState:
    """Day-0 setup: make sure every firm carries its one product, then run
    an opening labor round with every firm posting so production can start."""
    if state.bootstrapped:
        raise SimulationError("bootstrap called twice")
    for fid in sorted(state.firms):
        firm = state.firms[fid]
        if firm.inventory is None:
            firm.inventory = Product(product_id=0, price=1.0, quantity=0.0)
    markets.labor_step(state.firms, state.citizens, state.params, state.rng, entry_probability=1.0)
    state.bootstrapped = True
    return state


def run_day(state: SimulationState) -> SimulationState:
    for fid in sorted(state.firms):
        firm = state.firms[fid]
        produce(firm, state.employees_of(firm), state.params.ALPHA)
    state.clock.day += 1
    return state


def _step_record_month(state, month_index, writer):
    state.month_log.append(month_index)


def _step_demographics(state, month_index, writer):
    births, deaths = check_demographics(state, month_index, state.vitals, state.rng)
    if state.params.check_invariants:
        ledger = state.diagnostics.setdefault("pop_ledger", [])
        ledger.append(
            {
                "month": month_index,
                "births": len(births),
                "deaths": len(deaths),
                "pop": len(state.citizens),
            }
        )


def _step_salaries(state, month_index, writer):
    for fid in sorted(state.firms):
        firm = state.firms[fid]
        pay_salaries(firm, state.employees_of(firm), state.params.ALPHA)


def _step_pool_cash(state, month_index, writer):
    for fid in sorted(state.families):
        family = state.families[fid]
        pool_and_split(family, state.members_of(family))


def _step_consume(state, month_index, writer):
    firms = [state.firms[fid] for fid in sorted(state.firms)]
    for fid in sorted(state.families):
        family = state.families[fid]
        markets.consume_step(
            family, state.citizens, firms, state.regions, state.params, state.rng
        )


def _step_collect_taxes(state, month_index, writer):
    # Taxes accrue region by region at sale time; this closes the ledger.
    state.diagnostics["last_tax_by_cluster"] = {
        cluster_id: sum(r.treasure for r in members)
        for cluster_id, members in state.clusters().items()
    }


def _step_fiscal_spend(state, month_index, writer):
    k = state.params.TREASURE_INTO_SERVICES
    pops = state.population_by_region()
    for cluster_id, members in state.clusters().items():
        pool = sum(r.treasure for r in members)
        if pool == 0.0:
            continue  # nothing collected, nothing to spend
        n_now = sum(pops[r.region_id] for r in members)
        n_prev = state.cluster_pop_prev.get(cluster_id, n_now)
        if n_now <= 0:
            continue  # frozen index, treasury carried
        shared = quality_of_life_update(members[0].index, pool, k, n_prev, n_now)
        for region in members:
            region.index = shared
            region.treasure = 0.0
        state.cluster_pop_prev[cluster_id] = n_now
    for region in state.regions.values():
        region.pop = pops[region.region_id]


def _step_update_prices(state, month_index, writer):
    quarterly = month_index > 0 and month_index % 3 == 0
    for fid in sorted(state.firms):
        firm = state.firms[fid]
        if quarterly:
            quarterly_rebase(firm)
        update_prices(
            firm, state.params.QUANTITY_TO_CHANGE_PRICES, state.params.MARKUP
        )


def _step_labor_market(state, month_index, writer):
    report = markets.labor_step(state.firms, state.citizens, state.params, state.rng)
    state.diagnostics["last_labor_report"] = report


def _step_real_estate(state, month_index, writer):
    markets.real_estate_step(
        state.families,
        state.citizens,
        state.houses,
        state.firms,
        state.regions,
        state.params,
        state.rng,
    )


def _step_statistics(state, month_index, writer):
    if writer is not None:
        writer.emit(state, month_index)


_STEP_FUNCTIONS = {
    "record_month": _step_record_month,
    "demographics": _step_demographics,
    "salaries": _step_salaries,
    "pool_cash": _step_pool_cash,
    "consume": _step_consume,
    "collect_taxes": _step_collect_taxes,
    "fiscal_spend": _step_fiscal_spend,
    "update_prices": _step_update_prices,
    "labor_market": _step_labor_market,
    "real_estate": _step_real_estate,
    "statistics": _step_statistics,
}


def total_wealth(state: SimulationState) -> float:
    return state.total_wealth()


def run_month(state: SimulationState, writer=None, step_order=None) -> SimulationState:
    """Execute the monthly sequence at the current month boundary.

    Money conservation is asserted over the payroll-to-consumption and the
    pricing-to-real-estate windows when enabled; back-links are validated
    at the end of every month.
    """
    if state.clock.day % DAYS_PER_MONTH != 0:
        raise SimulationError(f"day {state.clock.day} is not a month boundary")
    order = MONTH_STEPS if step_order is None else tuple(step_order)
    month_index = state.clock.month_index
    default_order = order == MONTH_STEPS
    check_conservation = state.params.assert_conservation and default_order
    window_start = None
    for name in order:
        if check_conservation and name in ("salaries", "update_prices"):
            window_start = state.total_wealth()
        _STEP_FUNCTIONS[name](state, month_index, writer)
        if check_conservation and name in ("consume", "real_estate"):
            window_end = state.total_wealth()
            scale = max(abs(window_start), 1.0)
            drift = abs(window_end - window_start) / scale
            state.diagnostics.setdefault("conservation", []).append(
                {"month": month_index, "window_end": name, "relative_drift": drift}
            )
            if drift > 1e-6:
                raise ConservationError(
                    f"month {month_index}: wealth drifted by {drift:.3e} "
                    f"in the window ending at {name}"
                )
    if state.params.check_invariants:
        validate_backlinks(state)
    return state


def run_simulation(state: SimulationState, writer=None) -> SimulationState:
    """Bootstrap, then run TOTAL_DAYS of days with monthly breaks."""
    if not state.bootstrapped:
        bootstrap(state)
    for day in range(state.params.TOTAL_DAYS):
        if day % DAYS_PER_MONTH == 0:
            run_month(state, writer)
        run_day(state)
    return state


def validate_backlinks(state: SimulationState) -> None:
    """Cross-registry referential integrity; raises ConsistencyError."""
    for cid, citizen in state.citizens.items():
        family = state.families.get(citizen.family_id)
        if family is None or cid not in family.member_ids:
            raise ConsistencyError(f"citizen {cid} not registered in family {citizen.family_id}")
        if citizen.firm_id is not None:
            firm = state.firms.get(citizen.firm_id)
            if firm is None or cid not in firm.employee_ids:
                raise ConsistencyError(f"citizen {cid} not on staff of firm {citizen.firm_id}")
            if citizen.distance is None:
                raise ConsistencyError(f"employed citizen {cid} has no commuting distance")
        elif citizen.distance is not None:
            raise ConsistencyError(f"unemployed citizen {cid} has a commuting distance")
    for fid, family in state.families.items():
        for cid in family.member_ids:
            citizen = state.citizens.get(cid)
            if citizen is None or citizen.family_id != fid:
                raise ConsistencyError(f"family {fid} lists stale member {cid}")
        if family.household_id is not None:
            house = state.houses.get(family.household_id)
            if house is None or house.occupant_family_id != fid:
                raise ConsistencyError(f"family {fid} claims house {family.household_id}")
        for hid in family.owned_house_ids:
            house = state.houses.get(hid)
            if house is None or house.owner_family_id != fid:
                raise ConsistencyError(f"family {fid} claims ownership of house {hid}")
    for fid, firm in state.firms.items():
        for cid in firm.employee_ids:
            citizen = state.citizens.get(cid)
            if citizen is None or citizen.firm_id != fid:
                raise ConsistencyError(f"firm {fid} lists stale employee {cid}")
    for hid, house in state.houses.items():
        owner = state.families.get(house.owner_family_id)
        if owner is None or hid not in owner.owned_house_ids:
            raise ConsistencyError(f"house {hid} has stale owner {house.owner_family_id}")
        if house.occupant_family_id is not None:
            occupant = state.families.get(house.occupant_family_id)
            if occupant is None or occupant.household_id != hid:
                raise ConsistencyError(f"house {hid} has stale occupant {house.occupant_family_id}")
