"""Throughput of the two adversary-simulation engines.

The exact engine draws every up/down phase of every post; the accelerated
engine replaces phase drawing with renewal-approximation sampling.  This
prints posts/second for each and the speedup, at a population the exact
engine can still handle.  Run: python benchmarks/bench_engines.py
"""

import dataclasses
import time

from lethe.adversary import DAY, SimulationConfig, run_both_scenarios
from lethe.tuning import build_mechanism

CFG = SimulationConfig(
    initial_posts=10_000,
    creations_per_day=32,
    deletions_per_day=10,
    horizon_days=730,
    availability_target=0.90,
    mean_down=3600.0,
    theta_star_for_tuning=30 * DAY,
    thresholds_to_evaluate=(30 * DAY, 90 * DAY),
    seed=0,
    engine="exact",
)


def main():
    mechanism = build_mechanism(CFG.tuning_spec())
    timings = {}
    for engine in ("exact", "accelerated"):
        cfg = dataclasses.replace(CFG, engine=engine)
        started = time.perf_counter()
        reports = run_both_scenarios(cfg, mechanism=mechanism)
        elapsed = time.perf_counter() - started
        timings[engine] = elapsed
        fp = reports["flag-multi"].per_threshold[0].fp
        print(
            f"{engine:>12}: {elapsed:8.2f} s "
            f"({cfg.total_posts / elapsed:>12.0f} posts/s, multi FP@30d = {fp})"
        )
    print(f"\naccelerated speedup: x{timings['exact'] / timings['accelerated']:.0f}")


if __name__ == "__main__":
    main()
