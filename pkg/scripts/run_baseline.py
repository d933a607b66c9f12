#!/usr/bin/env python3
"""Run a 20-year baseline on the built-in synthetic world and print a summary."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from seal.data import synthetic_inputs
from seal.lab import run_single
from seal.params import Params


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--months", type=int, default=240)
    parser.add_argument("--out", default="output/baseline")
    args = parser.parse_args()

    params = Params(seed=args.seed, TOTAL_DAYS=21 * args.months)
    result = run_single(params, synthetic_inputs(), args.out)
    print(f"run {result.run_id}: {args.months} months in {result.wall_time:.1f}s")
    print(f"population {result.total_pop}, outputs under {result.run_dir}")
    for name in ("gdp_index", "unemployment", "gini_index", "average_utility"):
        print(f"  final {name}: {result.final_general[name]:.4f}")


if __name__ == "__main__":
    main()
