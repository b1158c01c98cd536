"""Point-query cost on precomputed schedules.

Demonstrates that answering "is this post visible at time t" stays
logarithmic in the number of toggles (binary search over the precomputed
timestamps), which is what makes schedule-gated reads viable at platform
scale.  Run: python benchmarks/bench_observable.py
"""

import time

import numpy as np

from lethe._rng import substream
from lethe.schedule import generate_schedule
from lethe.tuning import TuningSpec, build_mechanism

DAY = 86400
QUERIES = 20_000


def time_queries(schedule, horizon: int) -> float:
    rng = np.random.default_rng(1)
    times = rng.integers(schedule.created_at, horizon, size=QUERIES)
    started = time.perf_counter()
    for t in times:
        schedule.state_at(int(t))
    return (time.perf_counter() - started) / QUERIES


def main():
    up, down = build_mechanism(TuningSpec(0.90, 3600.0, 30 * DAY))
    print(f"{'horizon':>10} {'toggles':>10} {'ns/query':>10}")
    results = []
    for years in (1, 4, 16, 64):
        horizon = years * 365 * DAY
        schedule = generate_schedule(up, down, 0, horizon, substream(0, "bench", years))
        per_query = time_queries(schedule, horizon)
        results.append((len(schedule.toggles), per_query))
        print(f"{years:>9}y {len(schedule.toggles):>10} {per_query * 1e9:>10.0f}")

    # 64x more toggles should cost far less than 64x more time per query
    smallest, largest = results[0], results[-1]
    growth = largest[1] / smallest[1]
    size_ratio = largest[0] / smallest[0]
    print(f"\ntoggle count x{size_ratio:.0f}, query time x{growth:.2f}")
    assert growth < size_ratio / 4, "query cost is not sub-linear in toggles"
    print("OK: point queries scale sub-linearly (binary search)")


if __name__ == "__main__":
    main()
