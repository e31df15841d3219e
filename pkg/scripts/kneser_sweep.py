"""Exhaustive Kneser check over all pairs of nonempty subsets of Z_m."""

import argparse
import time

from mpcomm import bounds


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-order", type=int, default=10)
    ap.add_argument("--pair-budget", type=int, default=bounds.KNESER_PAIR_BUDGET)
    args = ap.parse_args()

    failed = False
    for m in range(2, args.max_order + 1):
        start = time.perf_counter()
        sweep = bounds.kneser_sweep(m, budget=args.pair_budget)
        took = time.perf_counter() - start
        status = "ok" if sweep.ok else f"{len(sweep.failures)} failures, first {sweep.failures[0]}"
        print(f"Z_{m:<3} {sweep.pairs:>9} pairs  {took:6.2f}s  {status}")
        failed |= not sweep.ok
    return int(failed)


if __name__ == "__main__":
    raise SystemExit(main())
