#!/usr/bin/env python3
"""Regenerate the frozen regression oracle in tests/test_stats.py.

Uses scipy.stats.linregress as the independent reference implementation.
The seed pins the datasets; rerun only if the golden recipe changes, then
paste the printed block over GOLDEN_DATASETS.
"""

import random

from scipy import stats as ss

SEED = 20260824
N_DATASETS = 10


def main() -> None:
    random.seed(SEED)
    print("GOLDEN_DATASETS = [")
    for _ in range(N_DATASETS):
        n = random.randint(5, 30)
        slope = random.uniform(-2, 2)
        xs = [round(random.uniform(0, 100), 3) for _ in range(n)]
        ys = [round(slope * x + random.gauss(0, 25), 3) for x in xs]
        ref = ss.linregress(xs, ys)
        pairs = ", ".join(f"({x}, {y})" for x, y in zip(xs, ys))
        print(f"    ([{pairs}],")
        print(f"     {float(ref.slope)!r}, {float(ref.intercept)!r}, "
              f"{float(ref.pvalue)!r}),")
    print("]")


if __name__ == "__main__":
    main()
