#!/usr/bin/env python3
"""Measure mean per-model solve+score time across experimental conditions
and print a side-by-side table with the published reference timings."""

import argparse
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ancestral.evaluation import (
    REFERENCE_SOLVE_SECONDS,
    BenchConfig,
    run_benchmark,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--conditions", nargs="+", default=["6:1", "7:1"],
                        help="n:c pairs, e.g. 6:1 6:4 7:1")
    parser.add_argument("--models", type=int, default=20)
    parser.add_argument("--samples", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'condition':<12}{'mean_s':>10}{'median_s':>10}{'reference_s':>13}")
    for cond in args.conditions:
        n, c = (int(v) for v in cond.split(":"))
        report = run_benchmark(
            BenchConfig(
                n_obs=n,
                models=args.models,
                samples=args.samples,
                max_order=c,
                seed=args.seed,
            )
        )
        times = [r.time_seconds for r in report.records]
        ref = REFERENCE_SOLVE_SECONDS.get((n, c))
        print(
            f"{f'n={n} c={c}':<12}"
            f"{report.mean_time:>10.2f}"
            f"{statistics.median(times):>10.2f}"
            f"{(f'{ref:.2f}' if ref is not None else 'n/a'):>13}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
