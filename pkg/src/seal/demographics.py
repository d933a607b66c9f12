"""Monthly aging, mortality and fertility, plus death bookkeeping.

Annual vital rates are applied once per year, in each citizen's month of
birth: the citizen ages, fertile women draw a birth, and everyone draws
against the mortality table. The dead leave every registry and are kept in
an append-only graveyard for statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .entities import Citizen

FERTILE_AGE_MIN = 15
FERTILE_AGE_MAX = 49


@dataclass
class VitalTables:
    """Annual mortality prob per (year, gender, age) and fertility per (year, age)."""

    mortality: dict[tuple[int, str, int], float] = field(default_factory=dict)
    fertility: dict[tuple[int, int], float] = field(default_factory=dict)
    _mortality_years: list[int] = field(init=False, default_factory=list)
    _fertility_years: list[int] = field(init=False, default_factory=list)
    _max_age: dict[tuple[int, str], int] = field(init=False, default_factory=dict)

    def __post_init__(self):
        self._reindex()

    def _reindex(self):
        self._mortality_years = sorted({k[0] for k in self.mortality})
        self._fertility_years = sorted({k[0] for k in self.fertility})
        self._max_age = {}
        for year, gender, age in self.mortality:
            key = (year, gender)
            self._max_age[key] = max(age, self._max_age.get(key, 0))

    @staticmethod
    def _clamp_year(year: int, years: list[int]) -> int | None:
        if not years:
            return None
        return min(max(year, years[0]), years[-1])

    def mortality_prob(self, year: int, gender: str, age: int) -> float:
        year = self._clamp_year(year, self._mortality_years)
        if year is None:
            return 0.0
        age = min(age, self._max_age.get((year, gender), age))
        return self.mortality.get((year, gender, age), 0.0)

    def fertility_prob(self, year: int, age: int) -> float:
        year = self._clamp_year(year, self._fertility_years)
        if year is None:
            return 0.0
        return self.fertility.get((year, age), 0.0)


def draw_qualification(rng, regional_table=None) -> float:
    """Gamma(shape 3, rate 3) clipped to (0.1, 10), or a draw from the
    supplied regional (value, weight) table."""
    if regional_table is not None:
        values, weights = regional_table
        return float(values[int(rng.choice(len(values), p=weights))])
    q = rng.gamma(3.0, 1.0 / 3.0)
    return float(min(10.0, max(0.1, q)))


def remove_dead(state, citizen: Citizen) -> None:
    """Withdraw a dead citizen from every registry and archive them."""
    state.citizens.pop(citizen.id, None)
    family = state.families.get(citizen.family_id)
    if family is not None:
        family.member_ids.discard(citizen.id)
    if citizen.firm_id is not None:
        firm = state.firms.get(citizen.firm_id)
        if firm is not None:
            firm.employee_ids.discard(citizen.id)
    state.graveyard.append(citizen)


def check_demographics(state, month_index: int, tables: VitalTables, rng):
    """Run one month of demographics; returns (births, deaths) lists.

    Processing a citizen is keyed to their month of birth: they age one
    year, fertile women evaluate a birth, then the death draw happens.
    Newborns join the mother's family at her address and are not
    processed until their first birthday comes around.
    """
    params = state.params
    year = params.YEAR_TO_START + month_index // 12
    calendar_month = month_index % 12 + 1
    births: list[Citizen] = []
    deaths: list[Citizen] = []

    for cid in sorted(state.citizens):
        citizen = state.citizens[cid]
        if citizen.month_of_birth != calendar_month:
            continue
        citizen.age += 1
        if (
            citizen.gender == "female"
            and FERTILE_AGE_MIN <= citizen.age <= FERTILE_AGE_MAX
        ):
            if rng.random() < tables.fertility_prob(year, citizen.age):
                baby = Citizen(
                    id=state.next_citizen_id,
                    gender="female" if rng.random() < 0.5 else "male",
                    month_of_birth=calendar_month,
                    age=0,
                    qualification=draw_qualification(
                        rng, state.qualification_tables.get(citizen.region_id)
                    ),
                    money=0.0,
                    region_id=citizen.region_id,
                    family_id=citizen.family_id,
                    address=citizen.address,
                )
                state.next_citizen_id += 1
                births.append(baby)
        if rng.random() < tables.mortality_prob(year, citizen.gender, citizen.age):
            deaths.append(citizen)

    for baby in births:
        state.citizens[baby.id] = baby
        state.families[baby.family_id].member_ids.add(baby.id)
    for citizen in deaths:
        remove_dead(state, citizen)
    return births, deaths
