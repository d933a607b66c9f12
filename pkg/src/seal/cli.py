"""Command-line entry point.

Subcommands mirror the harness modes: run, sensitivity, multirun,
autoadjust, acp-compare, plus gen-snapshot and validate-data utilities.
Exit codes: 0 success, 1 validation problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import data as data_mod
from . import lab
from .genesis import (
    GenesisConfig,
    GenesisError,
    SnapshotError,
    ensure_snapshot,
)
from .params import ConfigError, Params, load_params

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat KEY=value parameter file")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--out", default="output", help="output directory")
    parser.add_argument("--data-dir", help="directory with boundaries and CSV tables")
    parser.add_argument(
        "--synthetic", action="store_true", help="use the built-in two-town toy world"
    )
    parser.add_argument(
        "--pop-fraction", type=float, help="override PERCENTAGE_ACTUAL_POP"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single simulation")
    _add_common(run)
    run.add_argument("--snapshot", help="start from a .seal-snap file")

    sens = sub.add_parser("sensitivity", help="one-at-a-time parameter sweep")
    _add_common(sens)
    sens.add_argument("--values", type=int, default=6, help="grid points per parameter")

    multi = sub.add_parser("multirun", help="replicate a run over consecutive seeds")
    _add_common(multi)
    multi.add_argument("--runs", type=int, default=5, help="number of replicas")

    adjust = sub.add_parser("autoadjust", help="grid-refinement parameter search")
    _add_common(adjust)
    adjust.add_argument("--values", type=int, default=5, help="grid points per parameter")
    adjust.add_argument("--iters", type=int, default=2, help="refinement iterations")

    acp = sub.add_parser("acp-compare", help="municipal vs pooled fiscal clusters")
    _add_common(acp)
    acp.add_argument("--pairs", type=int, default=1, help="seed-matched pairs")

    snap = sub.add_parser("gen-snapshot", help="generate and cache a genesis snapshot")
    _add_common(snap)

    check = sub.add_parser("validate-data", help="schema-check a data directory")
    check.add_argument("--data-dir", required=True)

    return parser


def _load_inputs(args) -> data_mod.InputTables:
    if args.synthetic:
        return data_mod.synthetic_inputs()
    if not args.data_dir:
        raise ConfigError("either --synthetic or --data-dir is required")
    return data_mod.load_data_dir(args.data_dir)


def _build_params(args, **flag_overrides) -> Params:
    params = load_params(
        args.config,
        seed=args.seed,
        PERCENTAGE_ACTUAL_POP=args.pop_fraction,
    )
    if flag_overrides:
        params = params.replaced(**flag_overrides)
    problems = params.validate()
    if problems:
        raise ConfigError("invalid parameters:\n  " + "\n  ".join(problems))
    return params


def _out_dir(args) -> str:
    return os.environ.get("SEAL_OUTPUT_PATH") or args.out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, data_mod.DataError, GenesisError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _dispatch(args) -> int:
    if args.command == "validate-data":
        problems = data_mod.validate_data_dir(args.data_dir)
        for problem in problems:
            print(f"problem: {problem}")
        if problems:
            return EXIT_VALIDATION
        print("data directory is valid")
        return EXIT_OK

    out_dir = _out_dir(args)

    if args.command == "run":
        params = _build_params(args)
        tables = _load_inputs(args)
        result = lab.run_single(params, tables, out_dir, snapshot_path=args.snapshot)
        print(f"run {result.run_id} finished in {result.wall_time:.2f}s")
        print(f"outputs: {result.run_dir}")
        return EXIT_OK

    if args.command == "sensitivity":
        params = _build_params(args, sensitivity_choice=True)
        tables = _load_inputs(args)
        entries, report = lab.run_sensitivity(params, args.values, tables, out_dir)
        failures = [e for e in entries if e.error]
        print(f"{len(entries)} runs, {len(failures)} failed; report: {report}")
        return EXIT_OK if not failures else EXIT_RUNTIME

    if args.command == "multirun":
        params = _build_params(args, multi_run_simulation=True)
        tables = _load_inputs(args)
        results, _ = lab.run_multi(params, args.runs, tables, out_dir)
        print(f"{len(results)} replicas aggregated under {out_dir}")
        return EXIT_OK

    if args.command == "autoadjust":
        params = _build_params(args, auto_adjust_sensitivity_test=True)
        tables = _load_inputs(args)
        best, trace = lab.run_autoadjust(
            params, args.values, args.iters, tables=tables, out_dir=out_dir
        )
        print(f"{len(trace)} evaluations; best parameters written to {out_dir}")
        return EXIT_OK

    if args.command == "acp-compare":
        params = _build_params(args)
        tables = _load_inputs(args)
        pairs, _ = lab.run_acp_alternate(params, args.pairs, tables, out_dir)
        print(f"{len(pairs)} seed-matched pairs compared under {out_dir}")
        return EXIT_OK

    if args.command == "gen-snapshot":
        params = _build_params(args)
        tables = _load_inputs(args)
        cfg = GenesisConfig.from_params(params)
        world, path, regenerated = ensure_snapshot(tables, cfg, out_dir)
        action = "generated" if regenerated else "cache hit"
        print(f"{action}: {path} ({world.total_pop} citizens)")
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
