"""Time every method on the same random inputs and print a timing summary table.

    python3 scripts/timing_table.py --trials 1000000 --seed 0
"""
import argparse

from plucker_correction.bench import BenchConfig, emit_report, run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--warmup", type=int, default=10 ** 4)
    ap.add_argument("--distribution", choices=("uniform", "normal"), default="uniform")
    ap.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    args = ap.parse_args()
    cfg = BenchConfig(trials=args.trials, seed=args.seed, warmup=args.warmup,
                      distribution=args.distribution, stream=args.trials > 10 ** 7)
    print(emit_report(run_benchmark(cfg), args.format), end="")


if __name__ == "__main__":
    main()
