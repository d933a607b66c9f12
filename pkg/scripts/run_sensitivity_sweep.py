#!/usr/bin/env python3
"""Sweep all nine economic parameters one at a time on the synthetic world."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from seal.data import synthetic_inputs
from seal.lab import run_sensitivity
from seal.params import Params


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--values", type=int, default=6)
    parser.add_argument("--months", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="output/sensitivity")
    args = parser.parse_args()

    params = Params(seed=args.seed, TOTAL_DAYS=21 * args.months, sensitivity_choice=True)
    entries, report = run_sensitivity(params, args.values, synthetic_inputs(), args.out)
    failures = [e for e in entries if e.error]
    print(f"{len(entries)} runs ({len(failures)} failed); report at {report}")


if __name__ == "__main__":
    main()
