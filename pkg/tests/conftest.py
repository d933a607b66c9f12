"""Shared fixtures: tiny hand-built states and a scriptable rng."""

from __future__ import annotations

import numpy as np
import pytest

from seal.data import synthetic_inputs
from seal.entities import Citizen, Family, Firm, Household, Product, Region
from seal.genesis import GenesisConfig, generate_world
from seal.geo import Point, RegionBoundary
from seal.params import Params
from seal.scheduler import SimulationState, Clock, build_state


class ScriptedRng:
    """Delegates to a real generator, but `.random()` can be force-fed."""

    def __init__(self, seed=0, random_values=()):
        self._rng = np.random.default_rng(seed)
        self.random_queue = list(random_values)

    def random(self):
        if self.random_queue:
            return self.random_queue.pop(0)
        return self._rng.random()

    def __getattr__(self, name):
        return getattr(self._rng, name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def square_boundary(region_id="R1", x0=0.0, size=10.0, urban=None, **kw) -> RegionBoundary:
    ring = [(x0, 0.0), (x0 + size, 0.0), (x0 + size, size), (x0, size)]
    return RegionBoundary(
        region_id=region_id,
        name=region_id,
        outer=[[ring]],
        urban_zones=[] if urban is None else [[urban]],
        **kw,
    )


def make_region(region_id="R1", index=1.0, **kw) -> Region:
    return Region(
        region_id=region_id,
        name=region_id,
        boundary=square_boundary(region_id, **kw),
        index=index,
    )


def make_firm(firm_id=0, balance=1000.0, price=1.0, quantity=0.0, region_id="R1", xy=(5.0, 5.0)):
    return Firm(
        firm_id=firm_id,
        address=Point(*xy),
        region_id=region_id,
        total_balance=balance,
        last_qtr_balance=balance,
        inventory=Product(price=price, quantity=quantity),
    )


def make_citizen(cid=0, family_id=0, age=30, qualification=1.0, money=0.0, gender="female",
                 region_id="R1", xy=(1.0, 1.0), month_of_birth=1):
    return Citizen(
        id=cid,
        gender=gender,
        month_of_birth=month_of_birth,
        age=age,
        qualification=qualification,
        money=money,
        region_id=region_id,
        family_id=family_id,
        address=Point(*xy),
    )


def link_state(params=None, citizens=(), families=(), houses=(), firms=(), regions=(), seed=0):
    """Wire entities into a consistent SimulationState."""
    params = params or Params(seed=seed)
    state = SimulationState(
        params=params,
        clock=Clock(year_to_start=params.YEAR_TO_START),
        rng=np.random.default_rng(seed),
        regions={r.region_id: r for r in regions},
        citizens={c.id: c for c in citizens},
        families={f.id: f for f in families},
        houses={h.house_id: h for h in houses},
        firms={f.firm_id: f for f in firms},
    )
    state.next_citizen_id = max(state.citizens, default=-1) + 1
    for family in state.families.values():
        for cid in family.member_ids:
            state.citizens[cid].family_id = family.id
    pops = state.population_by_region()
    for region in state.regions.values():
        region.pop = pops.get(region.region_id, 0)
    for cluster_id, members in state.clusters().items():
        state.cluster_pop_prev[cluster_id] = sum(pops[r.region_id] for r in members)
    return state


def simple_household(hid=0, family=None, size=50.0, quality=2, region_id="R1", price=100.0,
                     xy=(2.0, 2.0)):
    return Household(
        house_id=hid,
        address=Point(*xy),
        size=size,
        quality=quality,
        region_id=region_id,
        owner_family_id=family.id if family else 0,
        occupant_family_id=family.id if family else None,
        price=price,
    )


@pytest.fixture
def toy_state():
    """Two families, one firm, one region; fully linked."""
    region = make_region()
    firm = make_firm(quantity=100.0)
    c0 = make_citizen(0, family_id=0, money=10.0)
    c1 = make_citizen(1, family_id=0, money=0.0)
    c2 = make_citizen(2, family_id=1, money=20.0, xy=(8.0, 8.0))
    f0 = Family(id=0, region_id="R1", member_ids={0, 1})
    f1 = Family(id=1, region_id="R1", member_ids={2})
    h0 = simple_household(0, f0)
    h1 = simple_household(1, f1, xy=(8.0, 8.0))
    f0.household_id = 0
    f0.owned_house_ids = {0}
    f0.address = h0.address
    f1.household_id = 1
    f1.owned_house_ids = {1}
    f1.address = h1.address
    return link_state(
        citizens=[c0, c1, c2],
        families=[f0, f1],
        houses=[h0, h1],
        firms=[firm],
        regions=[region],
    )


@pytest.fixture(scope="session")
def synthetic_tables():
    return synthetic_inputs()


@pytest.fixture(scope="session")
def small_world(synthetic_tables):
    params = Params(seed=11)
    return generate_world(synthetic_tables, GenesisConfig.from_params(params))


def fresh_state(world, tables, **param_overrides):
    params = Params(**param_overrides)
    return build_state(world, params, tables.vitals)


# --- acceptance reporting ---------------------------------------------------

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
