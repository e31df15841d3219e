"""Largest F-monochromatic rectangles holding a valid input, against the cardinality bound.

Small grids are searched exhaustively; anything past the candidate budget
falls back to hill climbing, whose result is only a lower bound on the max.
"""

import argparse
import json
import time

from mpcomm import bounds
from mpcomm.core import BudgetExceeded


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", nargs="*", default=["2,2", "2,3", "3,2", "3,3", "2,4"], help="n,k pairs")
    ap.add_argument("--restarts", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for item in args.grid:
        n, k = map(int, item.split(","))
        start = time.perf_counter()
        try:
            res = bounds.max_monochromatic_rectangle(n, k)
        except BudgetExceeded:
            res = bounds.max_monochromatic_rectangle(n, k, exhaustive=False, seed=args.seed, restarts=args.restarts)
        r = bounds.cardinality_bound(n, k)
        rec = res.to_json()
        rec.update(r=f"{r.numerator}/{r.denominator}", within_bound=res.size <= r,
                   seconds=round(time.perf_counter() - start, 3))
        print(json.dumps(rec, sort_keys=True))


if __name__ == "__main__":
    main()
