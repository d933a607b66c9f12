#!/usr/bin/env python3
"""Compare municipal vs pooled (ACP) fiscal clusters over seed-matched pairs."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from seal.data import synthetic_inputs
from seal.lab import run_acp_alternate
from seal.params import Params


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=5)
    parser.add_argument("--months", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="output/policy")
    args = parser.parse_args()

    params = Params(seed=args.seed, TOTAL_DAYS=21 * args.months)
    pairs, deltas = run_acp_alternate(params, args.pairs, synthetic_inputs(), args.out)
    final = [d for d in deltas if d["month"] == args.months - 1]
    print(f"{len(pairs)} pairs; final-month deltas (own minus pooled):")
    for row in final:
        print(f"  {row['indicator']:>20}: {row['delta']:+.4f}")


if __name__ == "__main__":
    main()
