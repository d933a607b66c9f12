"""Run parameters, their registered sweep bounds, and config-file parsing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass


class ConfigError(ValueError):
    pass


# Parameters the sensitivity sweep iterates over, with registered bounds.
PARAM_BOUNDS: dict[str, tuple[float, float]] = {
    "ALPHA": (0.01, 1.0),
    "BETA": (0.05, 0.95),
    "QUANTITY_TO_CHANGE_PRICES": (0.0, 500.0),
    "MARKUP": (0.01, 0.5),
    "LABOUR_MARKET": (0.0, 1.0),
    "SIZE_MARKET": (1.0, 50.0),
    "CONSUMPTION_SATISFACTION": (0.001, 1.0),
    "PERCENTAGE_CHECK_NEW_LOCATION": (0.005, 0.25),
    "TAX_CONSUMPTION": (0.0, 0.4),
}

ECONOMIC_PARAMS = list(PARAM_BOUNDS)

# The four levers the auto-adjustment search refines.
AUTO_ADJUST_PARAMS = ["ALPHA", "BETA", "MARKUP", "TAX_CONSUMPTION"]

MODE_FLAGS = ["sensitivity_choice", "multi_run_simulation", "auto_adjust_sensitivity_test"]

SAVE_PERIODICITIES = ("monthly", "quarterly", "annually", "never")


@dataclass
class Params:
    # Economic levers
    ALPHA: float = 0.2
    BETA: float = 0.85
    QUANTITY_TO_CHANGE_PRICES: float = 10.0
    MARKUP: float = 0.15
    LABOUR_MARKET: float = 0.75
    SIZE_MARKET: float = 10.0
    CONSUMPTION_SATISFACTION: float = 0.01
    PERCENTAGE_CHECK_NEW_LOCATION: float = 0.05
    TAX_CONSUMPTION: float = 0.10
    TREASURE_INTO_SERVICES: float = 0.0005

    # World setup
    TOTAL_DAYS: int = 5040  # 21 working days a month; 5040 days = 20 years
    MEMBERS_PER_FAMILY: float = 2.5
    HOUSE_VACANCY: float = 0.10
    PERCENTAGE_ACTUAL_POP: float = 0.01
    YEAR_TO_START: int = 2000
    FIRM_INITIAL_CASH: float = 100.0
    SIMPLIFY_POP_EVOLUTION: bool = False
    LIST_NEW_AGE_GROUPS: tuple[int, ...] = (6, 12, 17, 25, 35, 45, 65, 100)

    # Policy switch: True keeps each municipality fiscally independent,
    # False pools treasuries and the quality-of-life index per ACP.
    alternative0: bool = True

    # Run-mode flags (at most one may be set; all False means a single run)
    sensitivity_choice: bool = False
    multi_run_simulation: bool = False
    auto_adjust_sensitivity_test: bool = False

    # Output control
    PERIODICITY_SAVE_DATA: str = "monthly"
    create_csv_files: bool = False
    time_to_be_eliminated: float = 0.2

    # Diagnostics
    check_invariants: bool = True
    assert_conservation: bool = False

    seed: int = 0

    def mode(self) -> str:
        flags = [name for name in MODE_FLAGS if getattr(self, name)]
        if not flags:
            return "single"
        if len(flags) > 1:
            raise ConfigError(f"conflicting mode flags: {', '.join(flags)}")
        return {
            "sensitivity_choice": "sensitivity",
            "multi_run_simulation": "multirun",
            "auto_adjust_sensitivity_test": "autoadjust",
        }[flags[0]]

    def validate(self) -> list[str]:
        """Return a list of human-readable problems; empty means valid."""
        errors = []

        def check(cond: bool, message: str):
            if not cond:
                errors.append(message)

        check(0.01 <= self.ALPHA <= 1.0, f"ALPHA must be in [0.01, 1], got {self.ALPHA}")
        check(0.0 < self.BETA < 1.0, f"BETA must be in (0, 1), got {self.BETA}")
        check(
            self.QUANTITY_TO_CHANGE_PRICES >= 0.0,
            "QUANTITY_TO_CHANGE_PRICES must be >= 0",
        )
        check(0.0 < self.MARKUP < 1.0, f"MARKUP must be in (0, 1), got {self.MARKUP}")
        check(0.0 <= self.LABOUR_MARKET <= 1.0, "LABOUR_MARKET must be in [0, 1]")
        check(self.SIZE_MARKET >= 1.0, "SIZE_MARKET must be >= 1")
        check(self.CONSUMPTION_SATISFACTION > 0.0, "CONSUMPTION_SATISFACTION must be > 0")
        check(
            0.0 < self.PERCENTAGE_CHECK_NEW_LOCATION <= 1.0,
            "PERCENTAGE_CHECK_NEW_LOCATION must be in (0, 1]",
        )
        check(
            0.0 <= self.TAX_CONSUMPTION < 1.0,
            f"TAX_CONSUMPTION must be in [0, 1), got {self.TAX_CONSUMPTION}",
        )
        check(self.TREASURE_INTO_SERVICES >= 0.0, "TREASURE_INTO_SERVICES must be >= 0")
        check(self.TOTAL_DAYS >= 1, "TOTAL_DAYS must be >= 1")
        check(self.MEMBERS_PER_FAMILY > 0.0, "MEMBERS_PER_FAMILY must be > 0")
        check(self.HOUSE_VACANCY >= 0.0, "HOUSE_VACANCY must be >= 0")
        check(
            0.0 < self.PERCENTAGE_ACTUAL_POP <= 1.0,
            "PERCENTAGE_ACTUAL_POP must be in (0, 1]",
        )
        check(self.FIRM_INITIAL_CASH >= 0.0, "FIRM_INITIAL_CASH must be >= 0")
        check(
            0.0 <= self.time_to_be_eliminated < 1.0,
            "time_to_be_eliminated must be in [0, 1)",
        )
        check(
            self.PERIODICITY_SAVE_DATA in SAVE_PERIODICITIES,
            f"PERIODICITY_SAVE_DATA must be one of {SAVE_PERIODICITIES}",
        )
        groups = tuple(self.LIST_NEW_AGE_GROUPS)
        check(
            all(a < b for a, b in zip(groups, groups[1:])) and groups and groups[-1] == 100,
            "LIST_NEW_AGE_GROUPS must be strictly increasing and end at 100",
        )
        flags = [name for name in MODE_FLAGS if getattr(self, name)]
        check(len(flags) <= 1, f"conflicting mode flags: {', '.join(flags)}")
        return errors

    def replaced(self, **changes) -> "Params":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["LIST_NEW_AGE_GROUPS"] = list(self.LIST_NEW_AGE_GROUPS)
        return out

    def digest(self) -> str:
        payload = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


def _coerce(name: str, raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is str:
        return raw
    if kind in (tuple, "tuple"):
        parts = [p for p in raw.replace("[", "").replace("]", "").split(",") if p.strip()]
        return tuple(int(p) for p in parts)
    raise ConfigError(f"{name}: unsupported config type {kind}")


def parse_config_file(path) -> dict:
    """Read a flat KEY=value config file ('#' starts a comment)."""
    fields = {f.name: f for f in dataclasses.fields(Params)}
    values = {}
    unknown = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected KEY=value, got {stripped!r}")
            key, raw = stripped.split("=", 1)
            key = key.strip()
            if key not in fields:
                unknown.append(key)
                continue
            kind = fields[key].type
            base_kind = {"float": float, "int": int, "bool": bool, "str": str}.get(
                kind, tuple if "tuple" in str(kind) else kind
            )
            values[key] = _coerce(key, raw, base_kind)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def load_params(config_path=None, **overrides) -> Params:
    values = parse_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Params(**values)


def sensitivity_grid(param_name: str, n_values: int) -> list[float]:
    """n evenly spaced values spanning the registered bounds, inclusive."""
    if param_name not in PARAM_BOUNDS:
        raise ConfigError(f"no registered bounds for parameter {param_name!r}")
    if n_values < 2:
        raise ConfigError("n_values must be >= 2")
    lo, hi = PARAM_BOUNDS[param_name]
    step = (hi - lo) / (n_values - 1)
    values = [lo + i * step for i in range(n_values)]
    values[-1] = hi
    return values


def refinement_grid(lo: float, hi: float, n_values: int) -> list[float]:
    """Sub-interval grid used by the auto-adjustment search.

    The lower bracket value is kept exactly (it was already evaluated);
    the remaining points are rounded to two decimals, matching the coarse
    steps the search reports. Falls back to the raw grid if rounding
    collapses neighbouring values.
    """
    step = (hi - lo) / (n_values - 1)
    raw = [lo + i * step for i in range(n_values)]
    raw[-1] = hi
    rounded = [lo] + [round(v, 2) for v in raw[1:]]
    if all(a < b for a, b in zip(rounded, rounded[1:])):
        return rounded
    return raw
