"""Entity state and entity-local dynamics.

Citizens, families, households, firms and regions, plus the operations that
touch a single entity: production, pricing, payroll, family cash pooling,
house repricing and the fiscal quality-of-life update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geo import Point, RegionBoundary

WORKDAYS_PER_MONTH = 21
WORKFORCE_MIN_AGE = 16
WORKFORCE_MAX_AGE = 69


@dataclass
class Citizen:
    id: int
    gender: str  # "male" | "female"
    month_of_birth: int  # 1..12
    age: int
    qualification: float  # fixed after creation
    money: float
    region_id: str
    family_id: int
    address: Point = Point(0.0, 0.0)
    savings: float = 0.0
    firm_id: int | None = None
    utility: float = 0.0
    distance: float | None = None  # home -> workplace, None when unemployed

    def is_employed(self) -> bool:
        return self.firm_id is not None

    def in_workforce(self) -> bool:
        return WORKFORCE_MIN_AGE <= self.age <= WORKFORCE_MAX_AGE


@dataclass
class Family:
    id: int
    region_id: str | None = None
    member_ids: set[int] = field(default_factory=set)
    balance: float = 0.0
    savings: float = 0.0  # proceeds purse used in the real-estate market
    household_id: int | None = None
    owned_house_ids: set[int] = field(default_factory=set)
    address: Point | None = None

    def num_members(self) -> int:
        return len(self.member_ids)


@dataclass
class Household:
    house_id: int
    address: Point
    size: float  # fixed, in (20, 120)
    quality: int  # fixed, 1..4
    region_id: str
    owner_family_id: int
    price: float = 0.0
    occupant_family_id: int | None = None

    def is_occupied(self) -> bool:
        return self.occupant_family_id is not None


@dataclass
class Product:
    product_id: int = 0
    price: float = 1.0
    quantity: float = 0.0


@dataclass
class Firm:
    firm_id: int
    address: Point
    region_id: str
    total_balance: float
    last_qtr_balance: float
    profit: float = 1.0  # starts positive so opening payrolls carry a bonus
    employee_ids: set[int] = field(default_factory=set)
    inventory: Product | None = None
    amount_sold: float = 0.0  # cumulative gross revenue, tax inclusive
    amount_produced: float = 0.0

    def num_employees(self) -> int:
        return len(self.employee_ids)


@dataclass
class Region:
    region_id: str
    name: str
    boundary: RegionBoundary
    index: float  # quality-of-life index, seeded from HDI-2000
    treasure: float = 0.0
    pop: int = 0
    total_commute: float = 0.0
    region_gdp: float = 0.0
    fiscal_cluster: str = ""

    def __post_init__(self):
        if not self.fiscal_cluster:
            self.fiscal_cluster = self.region_id


def produce(firm: Firm, employees: list[Citizen], alpha: float) -> float:
    """One day of production: each worker adds qualification**alpha units.

    No-op unless the firm has workers, positive funds and a product.
    Returns the quantity added.
    """
    if not employees or firm.total_balance <= 0.0 or firm.inventory is None:
        return 0.0
    made = sum(c.qualification**alpha for c in employees)
    firm.inventory.quantity += made
    firm.amount_produced += made
    return made


def update_prices(firm: Firm, quantity_threshold: float, markup: float) -> None:
    """Raise the price when stock is scarce, cut it when abundant.

    Frozen when the firm has no employees or no inventory on hand.
    """
    if markup >= 1.0 or markup <= 0.0:
        raise ValueError(f"markup must be in (0, 1), got {markup}")
    product = firm.inventory
    if product is None or firm.num_employees() == 0 or product.quantity == 0.0:
        return
    if product.quantity < quantity_threshold:
        product.price *= 1.0 + markup
    else:
        product.price *= 1.0 - markup


def wage_base(firm: Firm) -> float:
    """Base salary multiplier: 1 plus the profit share of available cash.

    Only firms distributing profits (positive profit and positive cash)
    pay above the unit base.
    """
    if firm.profit > 0.0 and firm.total_balance > 0.0:
        return 1.0 + firm.profit / firm.total_balance
    return 1.0


def pay_salaries(firm: Firm, employees: list[Citizen], alpha: float) -> dict[int, float]:
    """Pay wage_base * 21 * qualification**alpha to each worker.

    If the wage bill exceeds available cash, all salaries are scaled
    pro rata so the balance never goes negative. Returns paid amounts.
    """
    if not employees:
        return {}
    base = wage_base(firm)
    weights = {c.id: WORKDAYS_PER_MONTH * c.qualification**alpha for c in employees}
    weight_sum = sum(weights.values())
    if weight_sum <= 0.0:
        return {}
    bill = base * weight_sum
    if bill <= firm.total_balance:
        wanted = {cid: base * w for cid, w in weights.items()}
    else:
        # Insolvent: the whole balance goes out, split by qualification
        # weight (the wage-base factor cancels under pro-rata scaling).
        wanted = {cid: firm.total_balance * w / weight_sum for cid, w in weights.items()}
    paid = {}
    total_paid = 0.0
    for citizen in employees:
        amount = wanted[citizen.id]
        citizen.money += amount
        paid[citizen.id] = amount
        total_paid += amount
    firm.total_balance = max(0.0, firm.total_balance - total_paid)
    return paid


def pool_and_split(family: Family, members: list[Citizen]) -> None:
    """Pool the family balance with members' cash and split it equally."""
    if not members:
        return
    total = family.balance + sum(c.money for c in members)
    share = total / len(members)
    for citizen in members:
        citizen.money = share
    family.balance = 0.0


def family_total_savings(family: Family, members: list[Citizen]) -> float:
    """Purchasing power in the real-estate market: purse plus member savings."""
    return family.savings + sum(c.savings for c in members)


def reprice_house(house: Household, region_index: float) -> None:
    """House price is size times quality times the regional index."""
    house.price = house.size * house.quality * region_index


def quality_of_life_update(
    index: float, treasure: float, k: float, n_prev: int, n_now: int
) -> float:
    """Dilute the index by population change and add per-capita spending.

    The stable-population case skips the n_prev/n_now round trip so a
    month with no spending leaves the index bit-for-bit unchanged.
    """
    if n_prev == n_now:
        return index + (treasure * k) / n_now
    return (index * n_prev) / n_now + (treasure * k) / n_now


def fiscal_spend(region: Region, k: float, n_prev: int, n_now: int) -> None:
    """Convert the collected treasury into quality of life.

    With nobody left in the region the index is frozen and the treasury
    carried over.
    """
    if n_now <= 0:
        return
    region.index = quality_of_life_update(region.index, region.treasure, k, n_prev, n_now)
    region.treasure = 0.0


def quarterly_rebase(firm: Firm) -> None:
    """Recompute profit as the cash-flow change since the last quarter."""
    firm.profit = firm.total_balance - firm.last_qtr_balance
    firm.last_qtr_balance = firm.total_balance
