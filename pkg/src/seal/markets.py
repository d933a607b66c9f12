"""The three markets: goods and services, labor, and real estate.

Each market is a monthly procedure over shared simulation registries. All
stochastic choices go through the single run-level rng, and every loop runs
in ascending-id order so runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .entities import (
    Citizen,
    Family,
    Firm,
    Household,
    Region,
    family_total_savings,
    reprice_house,
    wage_base,
)
from .geo import distance


@dataclass
class SaleReceipt:
    quantity: float
    gross: float
    tax: float
    change: float


@dataclass
class Posting:
    """Announcement board: hiring firms and job seekers, best first."""

    hiring_firms: list[Firm] = field(default_factory=list)
    candidates: list[Citizen] = field(default_factory=list)


@dataclass
class LaborReport:
    entered_firm_ids: list[int] = field(default_factory=list)
    hires: list[tuple[int, int]] = field(default_factory=list)  # (firm_id, citizen_id)
    fires: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class RealEstateReport:
    transactions: list[tuple[int, int, int, float]] = field(default_factory=list)
    # (house_id, seller_family_id, buyer_family_id, price)
    moves: list[tuple[int, int | None, int]] = field(default_factory=list)
    # (family_id, old_house_id, new_house_id)


def decide_spending(money: float, beta: float, rng) -> float:
    """Amount a member decides to spend this month.

    Below one unit of cash the draw is uniform over what is available;
    above it, a Beta(1, (1-beta)/beta) fraction whose mean is beta.
    """
    if money <= 0.0:
        return 0.0
    if money < 1.0:
        return rng.random() * money
    return rng.beta(1.0, (1.0 - beta) / beta) * money


def choose_firm(agent: Citizen, firms: list[Firm], size_market: int, rng) -> Firm | None:
    """Contact up to size_market random firms; buy from the cheapest or
    the closest one, with equal probability. Ties go to the lowest id."""
    if not firms:
        return None
    k = min(max(1, int(round(size_market))), len(firms))
    idx = rng.choice(len(firms), size=k, replace=False)
    sampled = [firms[int(i)] for i in idx]
    if rng.random() < 0.5:
        return min(sampled, key=lambda f: (f.inventory.price, f.firm_id))
    return min(sampled, key=lambda f: (distance(agent.address, f.address), f.firm_id))


def sale(firm: Firm, spend: float, tax_rate: float, regions: dict[str, Region]) -> SaleReceipt:
    """Sell as much as the stock covers; return change for the rest.

    The firm keeps the net-of-tax revenue and the tax accrues to the
    treasury of the firm's region.
    """
    if not 0.0 <= tax_rate < 1.0:
        raise ValueError(f"tax rate must be in [0, 1), got {tax_rate}")
    product = firm.inventory
    if product is None or spend <= 0.0:
        return SaleReceipt(0.0, 0.0, 0.0, spend)
    demanded = spend / product.price
    sold = min(demanded, product.quantity)
    gross = sold * product.price
    change = spend - gross
    tax = gross * tax_rate
    product.quantity -= sold
    firm.total_balance += gross - tax
    firm.amount_sold += gross
    regions[firm.region_id].treasure += tax
    return SaleReceipt(quantity=sold, gross=gross, tax=tax, change=change)


def consume_step(
    family: Family,
    citizens: dict[int, Citizen],
    firms: list[Firm],
    regions: dict[str, Region],
    params,
    rng,
) -> list[SaleReceipt]:
    """One family's monthly shopping round.

    Members with cash pick a firm and spend; whatever remains after all
    members traded is moved into their personal savings.
    """
    receipts = []
    members = [citizens[cid] for cid in sorted(family.member_ids)]
    for member in members:
        if member.money <= 0.0:
            continue
        spend = decide_spending(member.money, params.BETA, rng)
        if spend <= 0.0:
            continue
        firm = choose_firm(member, firms, params.SIZE_MARKET, rng)
        if firm is None:
            continue
        receipt = sale(firm, spend, params.TAX_CONSUMPTION, regions)
        member.money -= receipt.gross
        member.utility += receipt.quantity * params.CONSUMPTION_SATISFACTION
        receipts.append(receipt)
    for member in members:
        if member.money > 0.0:
            member.savings += member.money
            member.money = 0.0
    return receipts


def eligible_candidates(citizens: dict[int, Citizen]) -> list[Citizen]:
    """Unemployed citizens of working age (16 to 69)."""
    return [
        c
        for cid, c in sorted(citizens.items())
        if c.firm_id is None and c.in_workforce()
    ]


def assign_post(
    posting: Posting, rng, report: LaborReport | None = None
) -> list[tuple[int, int]]:
    """Match firms to candidates, best-paying firm first.

    The firm at the head of the queue picks, with equal probability, either
    the closest candidate or the most qualified one; the pair leaves both
    queues and the process repeats while both queues are non-empty.
    """
    firms = sorted(posting.hiring_firms, key=lambda f: (-wage_base(f), f.firm_id))
    candidates = sorted(posting.candidates, key=lambda c: (-c.qualification, c.id))
    matches = []
    for firm in firms:
        if not candidates:
            break
        if rng.random() < 0.5:
            chosen = min(
                candidates, key=lambda c: (distance(c.address, firm.address), c.id)
            )
        else:
            chosen = candidates[0]
        candidates.remove(chosen)
        firm.employee_ids.add(chosen.id)
        chosen.firm_id = firm.firm_id
        chosen.distance = distance(chosen.address, firm.address)
        matches.append((firm.firm_id, chosen.id))
        if report is not None:
            report.hires.append((firm.firm_id, chosen.id))
    posting.hiring_firms.clear()
    posting.candidates.clear()
    return matches


def labor_step(
    firms: dict[int, Firm],
    citizens: dict[int, Citizen],
    params,
    rng,
    entry_probability: float | None = None,
) -> LaborReport:
    """Monthly labor market round.

    Each firm enters with probability 1 - LABOUR_MARKET. Entrants in
    profit post one opening; entrants in loss make one random employee
    redundant instead. Openings are then matched against the unemployed.
    """
    if entry_probability is None:
        entry_probability = 1.0 - params.LABOUR_MARKET
    report = LaborReport()
    posting = Posting()
    for fid in sorted(firms):
        firm = firms[fid]
        if rng.random() >= entry_probability:
            continue
        report.entered_firm_ids.append(fid)
        if firm.profit > 0.0:
            posting.hiring_firms.append(firm)
        elif firm.employee_ids:
            staff = sorted(firm.employee_ids)
            fired_id = staff[int(rng.integers(0, len(staff)))]
            firm.employee_ids.discard(fired_id)
            worker = citizens[fired_id]
            worker.firm_id = None
            worker.distance = None
            report.fires.append((fid, fired_id))
    posting.candidates = eligible_candidates(citizens)
    assign_post(posting, rng, report)
    return report


def _rank_owned_houses(family: Family, houses: dict[int, Household]) -> list[Household]:
    """Owned houses, best first: quality, then price, then id."""
    owned = [houses[hid] for hid in sorted(family.owned_house_ids)]
    return sorted(owned, key=lambda h: (-h.quality, -h.price, h.house_id))


def _move_family(
    family: Family,
    new_house: Household,
    citizens: dict[int, Citizen],
    houses: dict[int, Household],
    firms: dict[int, Firm],
) -> None:
    if family.household_id is not None:
        old = houses[family.household_id]
        old.occupant_family_id = None
    new_house.occupant_family_id = family.id
    family.household_id = new_house.house_id
    family.address = new_house.address
    family.region_id = new_house.region_id
    for cid in sorted(family.member_ids):
        citizen = citizens[cid]
        citizen.address = new_house.address
        citizen.region_id = new_house.region_id
        if citizen.firm_id is not None:
            citizen.distance = distance(citizen.address, firms[citizen.firm_id].address)


def _deduct_savings(family: Family, members: list[Citizen], amount: float) -> None:
    take = min(family.savings, amount)
    family.savings -= take
    remainder = amount - take
    if remainder <= 0.0:
        return
    pool = sum(c.savings for c in members)
    scale = remainder / pool
    for citizen in members:
        citizen.savings = max(0.0, citizen.savings - citizen.savings * scale)


def real_estate_step(
    families: dict[int, Family],
    citizens: dict[int, Citizen],
    houses: dict[int, Household],
    firms: dict[int, Firm],
    regions: dict[str, Region],
    params,
    rng,
) -> RealEstateReport:
    """Monthly real-estate round.

    All houses are repriced from the current regional index. Empty houses
    go on sale; a sampled set of families with savings bids, richest
    first, each buying the most expensive house it can afford. Buyers then
    reconsider where to live based on house quality and employment.
    """
    report = RealEstateReport()

    for hid in sorted(houses):
        house = houses[hid]
        reprice_house(house, regions[house.region_id].index)

    # Families that died out free their dwelling for the market.
    for fid in sorted(families):
        family = families[fid]
        if not family.member_ids and family.household_id is not None:
            houses[family.household_id].occupant_family_id = None
            family.household_id = None
            family.address = None

    for_sale = [houses[hid] for hid in sorted(houses) if not houses[hid].is_occupied()]
    for_sale.sort(key=lambda h: (-h.price, h.house_id))

    eligible = [
        fid
        for fid in sorted(families)
        if families[fid].member_ids
        and family_total_savings(
            families[fid], [citizens[c] for c in families[fid].member_ids]
        )
        > 0.0
    ]
    n_buyers = math.ceil(params.PERCENTAGE_CHECK_NEW_LOCATION * len(families))
    n_buyers = min(n_buyers, len(eligible))
    if n_buyers > 0 and eligible:
        picked = rng.choice(len(eligible), size=n_buyers, replace=False)
        buyer_ids = [eligible[int(i)] for i in picked]
    else:
        buyer_ids = []

    def savings_of(fid: int) -> float:
        fam = families[fid]
        return family_total_savings(fam, [citizens[c] for c in fam.member_ids])

    buyer_ids.sort(key=lambda fid: (-savings_of(fid), fid))

    for fid in buyer_ids:
        family = families[fid]
        members = [citizens[c] for c in sorted(family.member_ids)]
        budget = family_total_savings(family, members)
        bought = None
        for house in for_sale:
            if house.owner_family_id == fid:
                continue
            if house.price <= budget:
                bought = house
                break
        if bought is None:
            continue
        seller = families[bought.owner_family_id]
        _deduct_savings(family, members, bought.price)
        seller.savings += bought.price
        seller.owned_house_ids.discard(bought.house_id)
        family.owned_house_ids.add(bought.house_id)
        bought.owner_family_id = fid
        for_sale.remove(bought)
        report.transactions.append((bought.house_id, seller.id, fid, bought.price))

        # Decide whether the purchase warrants moving.
        old_house_id = family.household_id
        if old_house_id is None:
            _move_family(family, bought, citizens, houses, firms)
            report.moves.append((fid, None, bought.house_id))
            continue
        ranked = _rank_owned_houses(family, houses)
        best = ranked[0]
        employed = sum(1 for c in members if c.is_employed())
        target = None
        if old_house_id == best.house_id and employed == 0 and len(ranked) > 1:
            target = ranked[1]
        elif old_house_id != best.house_id and employed >= 1:
            target = best
        if target is not None and target.house_id != old_house_id:
            _move_family(family, target, citizens, houses, firms)
            report.moves.append((fid, old_house_id, target.house_id))

    return report
