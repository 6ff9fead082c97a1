#!/usr/bin/env python3
"""Run the certification suite over a small zoo of Blaschke products.

Usage:
    python scripts/run_verify.py [--grid 4096] [--modes 64] [--seed 0]
"""

import argparse
import sys
import time

import numpy as np

from blaschkeops import RunConfig, make_blaschke, verify_all

ZOO = {
    "z^2": [0, 0],
    "z^3": [0, 0, 0],
    "single 0.5": [0.5],
    "zero at origin": [0, 0.5],
    "two mixed": [0.5, -0.3j],
    "three mixed": [0.5, -0.3j, 0.2 + 0.4j],
}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=4096)
    ap.add_argument("--modes", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = RunConfig(grid_size=args.grid, mode_window=args.modes, seed=args.seed)
    total_failures = 0
    for name, zeros in ZOO.items():
        t0 = time.time()
        reports = verify_all(make_blaschke(zeros), cfg)
        failures = [r for r in reports if not r.passed]
        total_failures += len(failures)
        worst = max(r.residual for r in reports if np.isfinite(r.residual))
        print(f"{name:16s}  {len(reports) - len(failures):2d}/{len(reports)} pass  "
              f"worst residual {worst:.3e}  ({time.time() - t0:.1f}s)")
        for r in failures:
            print(f"    FAIL {r.relation}: residual={r.residual:.3e} tol={r.tolerance:.0e}")
    return min(total_failures, 250)


if __name__ == "__main__":
    sys.exit(main())
