#!/usr/bin/env python3
"""How the controller picks the starting variant.

The selection rule wants the slowest variant that keeps the queue stable and
the expected wait under the constraint. For the three-model upscaling analog
the slowest model fails the expected-wait filter, so the run starts on the
mid-tier model and later drops to the fast one when the queue spikes. With
the stability check disabled, the overloaded face-detection pair is forced
onto the slow variant regardless.
"""

from pathlib import Path

import variantsim as vs
from variantsim.config import load_scenario
from variantsim.model import ms

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def main():
    config = load_scenario(SCENARIOS / "upscaling.yaml")
    profiles = config.services[0].profiles()
    rate = config.arrivals.rate_per_sec()
    print(f"upscaling candidates at {rate}/s, C={config.constraint_us / 1e6:.0f} s:")
    for p in profiles:
        rho = vs.utilization(rate, p.service_time_us)
        wait = (f"{vs.average_wait(p.service_time_us, rho) / 1e6:6.1f} s"
                if rho < 1 else "   inf")
        print(f"  {p.variant_id:11} D={p.service_time_us / 1e6:4.1f}s rho={rho:.3f} "
              f"expected wait {wait}")
    choice = vs.select_variant(profiles, rate, config.constraint_us, config.policy)
    print(f"selected: {choice.variant_id} (degraded={choice.degraded})\n")

    trace = vs.run_scenario(config)
    print(f"simulated: starts on {trace.initial_variants['upscaling']}, "
          f"switches: {[(s.to_variant, round(s.time_us / 1e6, 1)) for s in trace.switches]}\n")

    haar = vs.VariantProfile("haar", ms(70), 0.67)
    lbp = vs.VariantProfile("lbp", ms(45), 0.57)
    for check in (True, False):
        options = vs.PolicyOptions(stability_check=check)
        choice = vs.select_variant([haar, lbp], 17.0, ms(500), options)
        print(f"face detection at 17/s, stability check {'on ' if check else 'off'}: "
              f"selects {choice.variant_id}")


if __name__ == "__main__":
    main()
