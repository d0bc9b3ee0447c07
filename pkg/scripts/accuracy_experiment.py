#!/usr/bin/env python3
"""Pooled precision-recall curves for the ancestral and nonancestral
prediction tasks over a batch of synthetic models, written as CSV."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ancestral.evaluation import (
    BenchConfig,
    PrTask,
    pooled_pr_curve,
    run_benchmark,
    write_bench_csv,
    write_pr_csv,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=6)
    parser.add_argument("--latents", type=int, default=1)
    parser.add_argument("--edge-prob", type=float, default=0.3)
    parser.add_argument("--models", type=int, default=100)
    parser.add_argument("--samples", type=int, default=500)
    parser.add_argument("--max-order", type=int, default=1)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--oracle", action="store_true",
                        help="use hard oracle statements instead of data")
    parser.add_argument("--out-dir", default="accuracy_out")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = run_benchmark(
        BenchConfig(
            n_obs=args.n,
            models=args.models,
            samples=args.samples,
            n_latent=args.latents,
            edge_prob=args.edge_prob,
            max_order=args.max_order,
            alpha=args.alpha,
            seed=args.seed,
            use_oracle=args.oracle,
        )
    )
    results = report.ok_results()
    write_bench_csv(report, out / "bench.csv")
    write_pr_csv(pooled_pr_curve(results, PrTask.ANCESTRAL), out / "pr_ancestral.csv")
    write_pr_csv(
        pooled_pr_curve(results, PrTask.NONANCESTRAL), out / "pr_nonancestral.csv"
    )
    ok = sum(1 for r in report.records if r.status == "ok")
    print(f"{ok}/{len(report.records)} models solved; mean time {report.mean_time:.2f}s")
    print(f"curves written under {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
