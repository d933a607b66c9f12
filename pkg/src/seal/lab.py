"""Experiment harness: single runs, sensitivity sweeps, multi-run medians,
auto-adjustment search and the fiscal-merge policy comparison.

Every harness run is an ordinary single simulation, reproducible from its
manifest (params + seed); the harness only decides which parameter/seed
combinations to launch and how to aggregate the written outputs.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .data import InputTables
from .genesis import GenesisConfig, World, generate_world, snapshot_load
from .params import (
    AUTO_ADJUST_PARAMS,
    ECONOMIC_PARAMS,
    PARAM_BOUNDS,
    ConfigError,
    Params,
    refinement_grid,
    sensitivity_grid,
)
from .scheduler import build_state, run_simulation
from .stats import GENERAL_COLUMNS, OutputWriter, read_general_series


@dataclass
class RunResult:
    run_id: str
    params_digest: str
    seed: int
    final_general: dict[str, float]
    general_path: str
    regional_path: str
    run_dir: str
    wall_time: float
    total_pop: int


@dataclass
class SweepEntry:
    parameter: str
    value: float | None
    result: RunResult | None = None
    error: str | None = None


@dataclass
class AutoAdjustEvaluation:
    iteration: int
    parameter: str
    value: float
    gdp: float
    gini: float
    score: float = 0.0
    cached: bool = False


def _validated(params: Params) -> Params:
    problems = params.validate()
    if problems:
        raise ConfigError("invalid parameters:\n  " + "\n  ".join(problems))
    return params


def prepare_world(params: Params, tables: InputTables, snapshot_path=None) -> World:
    if snapshot_path is not None:
        return snapshot_load(snapshot_path)
    cfg = GenesisConfig.from_params(params)
    return generate_world(tables, cfg)


def execute_run(
    params: Params,
    tables: InputTables,
    out_dir,
    prefix: str = "run",
    snapshot_path=None,
    world: World | None = None,
) -> RunResult:
    """Run one simulation end to end and write its outputs."""
    _validated(params)
    if world is None:
        world = prepare_world(params, tables, snapshot_path)
    state = build_state(world, params, tables.vitals, tables.qualifications)
    run_id = f"{prefix}_{params.digest()[:10]}_s{params.seed}"
    run_dir = os.path.join(out_dir, run_id)
    started = time.perf_counter()
    writer = OutputWriter(
        run_dir,
        params,
        world.total_pop,
        params.seed,
        extra_manifest={"run_id": run_id, "genesis_config_digest": world.config_digest},
    )
    try:
        run_simulation(state, writer)
    finally:
        writer.close()
    elapsed = time.perf_counter() - started
    series = read_general_series(writer.paths.txt["general"])
    final = {name: values[-1] for name, values in series.items()}
    return RunResult(
        run_id=run_id,
        params_digest=params.digest(),
        seed=params.seed,
        final_general=final,
        general_path=writer.paths.txt["general"],
        regional_path=writer.paths.txt["regional"],
        run_dir=run_dir,
        wall_time=elapsed,
        total_pop=world.total_pop,
    )


def run_single(params: Params, tables: InputTables, out_dir, snapshot_path=None) -> RunResult:
    """A plain single run; refuses to start when a harness mode flag is set."""
    if params.mode() != "single":
        raise ConfigError(
            f"run_single requires all mode flags off (configured mode: {params.mode()})"
        )
    return execute_run(params, tables, out_dir, prefix="run", snapshot_path=snapshot_path)


def run_sensitivity(
    params: Params,
    n_values: int,
    tables: InputTables,
    out_dir,
    runner=None,
) -> tuple[list[SweepEntry], str]:
    """One-at-a-time sweep of every economic parameter over its bounds.

    Each grid value is run with all other parameters at their configured
    defaults; a baseline run with the defaults themselves is included.
    Per-run failures are recorded and the sweep continues.
    """
    if params.mode() != "sensitivity":
        raise ConfigError("run_sensitivity requires sensitivity_choice=True")
    base = params.replaced(sensitivity_choice=False)
    if runner is None:
        runner = lambda p, prefix: execute_run(p, tables, out_dir, prefix=prefix)

    entries: list[SweepEntry] = []
    baseline = SweepEntry(parameter="(baseline)", value=None)
    try:
        baseline.result = runner(base, "sens_baseline")
    except Exception as exc:  # noqa: BLE001 - a failed run must not stop the sweep
        baseline.error = str(exc)
    entries.append(baseline)

    for name in ECONOMIC_PARAMS:
        for value in sensitivity_grid(name, n_values):
            entry = SweepEntry(parameter=name, value=value)
            child = base.replaced(**{name: value})
            try:
                entry.result = runner(child, f"sens_{name}")
            except Exception as exc:  # noqa: BLE001
                entry.error = str(exc)
            entries.append(entry)

    report_path = os.path.join(out_dir, "sensitivity_report.csv")
    os.makedirs(out_dir, exist_ok=True)
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("parameter,value,status," + ",".join(GENERAL_COLUMNS) + "\n")
        for entry in entries:
            value = "" if entry.value is None else str(entry.value)
            if entry.result is not None:
                final = entry.result.final_general
                cells = [str(final[c]) for c in GENERAL_COLUMNS]
                fh.write(f"{entry.parameter},{value},ok," + ",".join(cells) + "\n")
            else:
                fh.write(
                    f"{entry.parameter},{value},failed,"
                    + ",".join([""] * len(GENERAL_COLUMNS))
                    + "\n"
                )
    return entries, report_path


def aggregate_general(series_list: list[dict[str, list[float]]]) -> dict[str, dict[str, list[float]]]:
    """Per-month median and interquartile band for every general column."""
    months = min(len(s["month"]) for s in series_list)
    out: dict[str, dict[str, list[float]]] = {}
    for name in GENERAL_COLUMNS:
        stacked = np.array([s[name][:months] for s in series_list])
        out[name] = {
            "median": np.median(stacked, axis=0).tolist(),
            "q25": np.percentile(stacked, 25, axis=0).tolist(),
            "q75": np.percentile(stacked, 75, axis=0).tolist(),
        }
    return out


def run_multi(
    params: Params, number_of_runs: int, tables: InputTables, out_dir
) -> tuple[list[RunResult], dict]:
    """Replicate the same configuration over consecutive seeds."""
    if params.mode() != "multirun":
        raise ConfigError("run_multi requires multi_run_simulation=True")
    if number_of_runs < 2:
        raise ConfigError("number_of_runs must be >= 2")
    base = params.replaced(multi_run_simulation=False)
    results = []
    for offset in range(number_of_runs):
        child = base.replaced(seed=base.seed + offset)
        results.append(execute_run(child, tables, out_dir, prefix="multi"))
    aggregates = aggregate_general(
        [read_general_series(r.general_path) for r in results]
    )
    agg_path = os.path.join(out_dir, "aggregate_general.csv")
    months = len(aggregates["month"]["median"])
    measures = [c for c in GENERAL_COLUMNS if c != "month"]
    with open(agg_path, "w", encoding="utf-8") as fh:
        header = ["month"]
        for name in measures:
            header += [f"{name}_median", f"{name}_q25", f"{name}_q75"]
        fh.write(",".join(header) + "\n")
        for i in range(months):
            cells = [str(int(aggregates["month"]["median"][i]))]
            for name in measures:
                block = aggregates[name]
                cells += [str(block["median"][i]), str(block["q25"][i]), str(block["q75"][i])]
            fh.write(",".join(cells) + "\n")
    return results, aggregates


def _minmax(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi <= lo:
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def run_autoadjust(
    params: Params,
    interval_for_values: int,
    times_test_approximations: int,
    tables: InputTables | None = None,
    out_dir=None,
    evaluator=None,
) -> tuple[Params, list[AutoAdjustEvaluation]]:
    """Grid-refinement search for high final GDP and low final inequality.

    Each iteration evaluates a one-at-a-time grid per searched parameter,
    scores runs by min-max normalized GDP minus normalized inequality, and
    narrows every parameter's interval to the best grid point and its
    strongest neighbour before re-splitting.
    """
    if params.mode() != "autoadjust":
        raise ConfigError("run_autoadjust requires auto_adjust_sensitivity_test=True")
    if interval_for_values < 2:
        raise ConfigError("interval_for_values must be >= 2")
    base = params.replaced(auto_adjust_sensitivity_test=False)
    if evaluator is None:
        if tables is None or out_dir is None:
            raise ConfigError("run_autoadjust needs tables and out_dir (or an evaluator)")

        def evaluator(p: Params) -> tuple[float, float]:
            result = execute_run(p, tables, out_dir, prefix="adjust")
            return result.final_general["gdp_index"], result.final_general["gini_index"]

    brackets = {name: PARAM_BOUNDS[name] for name in AUTO_ADJUST_PARAMS}
    cache: dict[str, tuple[float, float]] = {}
    trace: list[AutoAdjustEvaluation] = []
    all_evals: list[AutoAdjustEvaluation] = []

    for iteration in range(times_test_approximations):
        iter_evals: list[AutoAdjustEvaluation] = []
        grids: dict[str, list[float]] = {}
        for name in AUTO_ADJUST_PARAMS:
            lo, hi = brackets[name]
            if iteration == 0:
                step = (hi - lo) / (interval_for_values - 1)
                grid = [lo + i * step for i in range(interval_for_values)]
                grid[-1] = hi
            else:
                grid = refinement_grid(lo, hi, interval_for_values)
            grids[name] = grid
            for value in grid:
                child = base.replaced(**{name: value})
                digest = child.digest()
                cached = digest in cache
                if not cached:
                    cache[digest] = evaluator(child)
                gdp, gini = cache[digest]
                evaluation = AutoAdjustEvaluation(
                    iteration=iteration,
                    parameter=name,
                    value=value,
                    gdp=gdp,
                    gini=gini,
                    cached=cached,
                )
                iter_evals.append(evaluation)
                trace.append(evaluation)
        z_gdp = _minmax([e.gdp for e in iter_evals])
        z_gini = _minmax([e.gini for e in iter_evals])
        for evaluation, zg, zi in zip(iter_evals, z_gdp, z_gini):
            evaluation.score = zg - zi
        all_evals.extend(iter_evals)
        for name in AUTO_ADJUST_PARAMS:
            grid = grids[name]
            scored = [e for e in iter_evals if e.parameter == name]
            best_idx = max(range(len(scored)), key=lambda i: scored[i].score)
            if best_idx == 0:
                lo, hi = grid[0], grid[1]
            elif best_idx == len(grid) - 1:
                lo, hi = grid[-2], grid[-1]
            else:
                left, right = scored[best_idx - 1].score, scored[best_idx + 1].score
                if left >= right:
                    lo, hi = grid[best_idx - 1], grid[best_idx]
                else:
                    lo, hi = grid[best_idx], grid[best_idx + 1]
            brackets[name] = (lo, hi)

    if not all_evals:
        raise ConfigError("auto-adjustment produced no evaluations")
    z_gdp = _minmax([e.gdp for e in all_evals])
    z_gini = _minmax([e.gini for e in all_evals])
    final_scores = [zg - zi for zg, zi in zip(z_gdp, z_gini)]
    best = all_evals[max(range(len(all_evals)), key=lambda i: final_scores[i])]
    best_params = base.replaced(**{best.parameter: best.value})

    pareto = []
    for e in all_evals:
        dominated = any(
            (o.gdp >= e.gdp and o.gini <= e.gini and (o.gdp > e.gdp or o.gini < e.gini))
            for o in all_evals
        )
        if not dominated:
            pareto.append((e.parameter, e.value, e.gdp, e.gini))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "autoadjust_trace.csv"), "w", encoding="utf-8") as fh:
            fh.write("iteration,parameter,value,gdp,gini,score,cached\n")
            for e in trace:
                fh.write(
                    f"{e.iteration},{e.parameter},{e.value},{e.gdp},{e.gini},{e.score},{e.cached}\n"
                )
        with open(os.path.join(out_dir, "autoadjust_best.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "best_parameter": best.parameter,
                    "best_value": best.value,
                    "gdp": best.gdp,
                    "gini": best.gini,
                    "unique_runs": len(cache),
                    "evaluations": len(trace),
                    "pareto_front": [
                        {"parameter": p, "value": v, "gdp": g, "gini": gi}
                        for p, v, g, gi in pareto
                    ],
                },
                fh,
                indent=2,
            )
    return best_params, trace


def run_acp_alternate(
    params: Params, n_pairs: int, tables: InputTables, out_dir
) -> tuple[list[tuple[RunResult, RunResult]], list[dict]]:
    """Seed-matched pairs with municipal vs pooled fiscal clusters.

    Writes per-indicator monthly medians for both policies and their
    difference.
    """
    missing = [b.region_id for b in tables.boundaries if b.acp_id is None]
    if missing or not tables.boundaries:
        raise ConfigError(
            "acp comparison needs acp_id on every boundary; missing for: "
            + ", ".join(missing or ["<no boundaries>"])
        )
    if n_pairs < 1:
        raise ConfigError("n_pairs must be >= 1")
    base = params.replaced(
        sensitivity_choice=False,
        multi_run_simulation=False,
        auto_adjust_sensitivity_test=False,
    )
    pairs = []
    for offset in range(n_pairs):
        seed = base.seed + offset
        kept = execute_run(
            base.replaced(seed=seed, alternative0=True), tables, out_dir, prefix="acp_own"
        )
        merged = execute_run(
            base.replaced(seed=seed, alternative0=False), tables, out_dir, prefix="acp_pooled"
        )
        pairs.append((kept, merged))

    series_true = [read_general_series(r.general_path) for r, _ in pairs]
    series_false = [read_general_series(r.general_path) for _, r in pairs]
    months = min(
        min(len(s["month"]) for s in series_true),
        min(len(s["month"]) for s in series_false),
    )
    measures = [c for c in GENERAL_COLUMNS if c != "month"]
    deltas = []
    for i in range(months):
        for name in measures:
            med_true = float(np.median([s[name][i] for s in series_true]))
            med_false = float(np.median([s[name][i] for s in series_false]))
            deltas.append(
                {
                    "month": i,
                    "indicator": name,
                    "median_own": med_true,
                    "median_pooled": med_false,
                    "delta": med_true - med_false,
                }
            )
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "acp_deltas.csv"), "w", encoding="utf-8") as fh:
        fh.write("month,indicator,median_own,median_pooled,delta\n")
        for row in deltas:
            fh.write(
                f"{row['month']},{row['indicator']},{row['median_own']},"
                f"{row['median_pooled']},{row['delta']}\n"
            )
    return pairs, deltas
