import numpy as np
import pytest

from seal.demographics import VitalTables, check_demographics, remove_dead
from seal.entities import Family
from seal.markets import real_estate_step
from seal.params import Params

from conftest import link_state, make_citizen, make_firm, make_region, simple_household


def flat_tables(mortality=0.0, fertility=0.0, years=range(2000, 2031)):
    m = {}
    f = {}
    for year in years:
        for gender in ("male", "female"):
            for age in range(0, 121):
                m[(year, gender, age)] = mortality
        for age in range(15, 50):
            f[(year, age)] = fertility
    return VitalTables(mortality=m, fertility=f)


def state_with(citizens, firms=()):
    families = {}
    for c in citizens:
        families.setdefault(c.family_id, Family(id=c.family_id, region_id="R1"))
        families[c.family_id].member_ids.add(c.id)
    return link_state(
        citizens=citizens,
        families=list(families.values()),
        firms=firms,
        regions=[make_region()],
    )


class TestCheckDemographics:
    def test_zero_mortality_no_deaths(self):
        citizens = [make_citizen(i, family_id=i, month_of_birth=1) for i in range(20)]
        state = state_with(citizens)
        births, deaths = check_demographics(state, 0, flat_tables(), state.rng)
        assert deaths == []
        assert len(state.citizens) == 20

    def test_certain_birth(self):
        mother = make_citizen(0, family_id=0, age=29, gender="female", month_of_birth=1)
        state = state_with([mother])
        births, deaths = check_demographics(state, 0, flat_tables(fertility=1.0), state.rng)
        assert len(births) == 1
        baby = births[0]
        assert baby.age == 0
        assert baby.month_of_birth == 1
        assert baby.family_id == mother.family_id
        assert baby.money == 0.0
        assert baby.address == mother.address
        assert baby.id in state.families[0].member_ids
        assert mother.age == 30  # aged before the draw

    def test_only_birth_month_processed(self):
        c = make_citizen(0, family_id=0, age=40, month_of_birth=5)
        state = state_with([c])
        check_demographics(state, 0, flat_tables(mortality=1.0), state.rng)
        assert c.age == 40 and 0 in state.citizens
        check_demographics(state, 4, flat_tables(mortality=1.0), state.rng)
        assert 0 not in state.citizens  # month 5: aged then certainly died

    def test_ages_once_per_calendar_year(self):
        c = make_citizen(0, family_id=0, age=40, month_of_birth=3)
        state = state_with([c])
        for month_index in range(24):
            check_demographics(state, month_index, flat_tables(), state.rng)
        assert c.age == 42

    def test_annual_death_rate_matches_table(self):
        # Binomial check: flat 0.12 annual mortality over 10^4 citizens,
        # aggregated across seeds, stays within two standard errors.
        prob = 0.12
        total = 0
        n = 0
        for seed in (1, 2, 3):
            citizens = [
                make_citizen(i, family_id=i, age=30, month_of_birth=(i % 12) + 1)
                for i in range(10_000)
            ]
            state = link_state(
                citizens=citizens,
                families=[Family(id=i, region_id="R1", member_ids={i}) for i in range(10_000)],
                regions=[make_region()],
                seed=seed,
            )
            deaths = 0
            for month_index in range(12):
                _, dead = check_demographics(state, month_index, flat_tables(mortality=prob), state.rng)
                deaths += len(dead)
            total += deaths
            n += 10_000
        rate = total / n
        sd = np.sqrt(prob * (1 - prob) / n)
        assert abs(rate - prob) <= 2 * sd

    def test_newborn_not_processed_same_year(self):
        mother = make_citizen(0, family_id=0, age=29, gender="female", month_of_birth=1)
        state = state_with([mother])
        check_demographics(state, 0, flat_tables(fertility=1.0), state.rng)
        baby_id = max(state.citizens)
        check_demographics(state, 1, flat_tables(fertility=1.0), state.rng)
        assert state.citizens[baby_id].age == 0

    def test_year_clamped_beyond_table(self):
        c = make_citizen(0, family_id=0, age=30, month_of_birth=1)
        state = state_with([c])
        tables = flat_tables(mortality=1.0, years=range(2000, 2002))
        check_demographics(state, 12 * 50, tables, state.rng)  # year 2050
        assert 0 not in state.citizens


class TestRemoveDead:
    def test_employed_death_shrinks_staff(self):
        firm = make_firm()
        worker = make_citizen(0, family_id=0)
        worker.firm_id = firm.firm_id
        worker.distance = 1.0
        firm.employee_ids.add(0)
        state = state_with([worker], firms=[firm])
        remove_dead(state, worker)
        assert firm.employee_ids == set()
        assert 0 not in state.citizens
        assert 0 not in state.families[0].member_ids
        assert state.graveyard == [worker]

    def test_graveyard_disjoint_and_append_only(self):
        citizens = [make_citizen(i, family_id=0, month_of_birth=1) for i in range(30)]
        family = Family(id=0, region_id="R1", member_ids=set(range(30)))
        state = link_state(citizens=citizens, families=[family], regions=[make_region()])
        seen = []
        for month_index in range(12):
            check_demographics(state, month_index, flat_tables(mortality=0.5), state.rng)
            dead_ids = {c.id for c in state.graveyard}
            assert dead_ids.isdisjoint(state.citizens.keys())
            assert [c.id for c in state.graveyard[: len(seen)]] == seen
            seen = [c.id for c in state.graveyard]

    def test_population_ledger_is_exact(self):
        citizens = [
            make_citizen(i, family_id=0, age=20 + (i % 30), month_of_birth=(i % 12) + 1,
                         gender="female" if i % 2 else "male")
            for i in range(200)
        ]
        family = Family(id=0, region_id="R1", member_ids=set(range(200)))
        state = link_state(citizens=citizens, families=[family], regions=[make_region()])
        tables = flat_tables(mortality=0.1, fertility=0.3)
        for month_index in range(24):
            pop_before = len(state.citizens)
            births, deaths = check_demographics(state, month_index, tables, state.rng)
            assert len(state.citizens) == pop_before + len(births) - len(deaths)

    def test_emptied_family_keeps_house_until_market_runs(self):
        # Three-citizen toy world: the sole member of family 1 dies; the
        # dwelling stays assigned until the next real-estate round vacates it.
        region = make_region()
        c0 = make_citizen(0, family_id=0)
        c1 = make_citizen(1, family_id=0)
        c2 = make_citizen(2, family_id=1, month_of_birth=1, age=50)
        f0 = Family(id=0, region_id="R1", member_ids={0, 1})
        f1 = Family(id=1, region_id="R1", member_ids={2})
        h0 = simple_household(0, f0)
        h1 = simple_household(1, f1)
        f0.household_id, f0.owned_house_ids, f0.address = 0, {0}, h0.address
        f1.household_id, f1.owned_house_ids, f1.address = 1, {1}, h1.address
        state = link_state(
            citizens=[c0, c1, c2], families=[f0, f1], houses=[h0, h1], regions=[region]
        )
        check_demographics(state, 0, flat_tables(mortality=1.0), state.rng)
        assert 2 not in state.citizens
        assert f1.member_ids == set()
        assert h1.occupant_family_id == 1  # still assigned
        real_estate_step(
            state.families, state.citizens, state.houses, state.firms,
            state.regions, Params(), state.rng,
        )
        assert h1.occupant_family_id is None
        assert f1.household_id is None
