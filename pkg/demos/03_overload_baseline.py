#!/usr/bin/env python3
"""An overloaded queue without switching: unbounded growth.

At 17 requests/s the slow variant serves 14.3/s, so the baseline queue climbs
for the whole run and sojourn times stay above the constraint once the first
violation appears. The queue-length series is written as plot-ready CSV.
"""

import dataclasses
from pathlib import Path

import variantsim as vs
from variantsim.analysis import rows_to_csv, write_text
from variantsim.config import load_scenario

SCENARIO = Path(__file__).parent.parent / "scenarios" / "face_detection_l17.yaml"
OUT = Path(__file__).parent / "out"


def main():
    config = load_scenario(SCENARIO)
    # force the slow variant despite the overload, then freeze it
    config = dataclasses.replace(
        config,
        policy=dataclasses.replace(config.policy, stability_check=False, switching=False),
    )
    trace = vs.run_scenario(config)
    ordered = trace.records_by_arrival()

    marks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    print("queue length seen by arriving requests:")
    for mark in marks:
        idx = min(int(mark * len(ordered)), len(ordered) - 1)
        record = ordered[idx]
        print(f"  request {idx:4d} ({mark * 100:3.0f}%): "
              f"queue {record.stages[0].queue_length_at_arrival:3d}, "
              f"sojourn {record.sojourn_us / 1000:7.1f} ms")

    stats = vs.violation_stats(trace, config.constraint_us)
    print(f"\nviolations: {stats.count}/{len(ordered)} "
          f"(first at request {stats.first_violation_index})")

    OUT.mkdir(exist_ok=True)
    rows = ((i, r.stages[0].queue_length_at_arrival, r.sojourn_us)
            for i, r in enumerate(ordered))
    path = OUT / "overload_queue_series.csv"
    write_text(path, rows_to_csv(("request_index", "queue_length", "sojourn_us"), rows))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
