#!/usr/bin/env python3
"""The closed-form queue math behind the switching controller.

For each variant of the face-detection pair this prints the utilization at a
given arrival rate, the expected wait, and the queue-length threshold at
which a switch command fires.
"""

import variantsim as vs
from variantsim.model import ms

CONSTRAINT_US = ms(500)
VARIANTS = [("haar", ms(70)), ("lbp", ms(45))]
RATES = [10.0, 15.0, 17.0]


def main():
    print(f"constraint C = {CONSTRAINT_US / 1000:.0f} ms\n")
    header = f"{'variant':8} {'D':>7} {'rate':>6} {'rho':>6} {'stable':>7} {'avg wait':>10} {'T':>3} {'T(a=0.5)':>9}"
    print(header)
    print("-" * len(header))
    for name, service_us in VARIANTS:
        threshold = vs.switch_threshold(CONSTRAINT_US, service_us)
        for rate in RATES:
            rho = vs.utilization(rate, service_us)
            stable = vs.is_stable(rate, service_us)
            wait = f"{vs.average_wait(service_us, rho) / 1000:8.1f}ms" if stable else "   (inf)"
            print(
                f"{name:8} {service_us / 1000:5.0f}ms {rate:5.0f}/s {rho:6.2f} "
                f"{str(stable):>7} {wait:>10} {threshold.value:3d} "
                f"{vs.dampened_threshold(threshold.value, 0.5):9.1f}"
            )
        print()

    print("wait for a request joining behind L others (haar):")
    for queue_len in (0, 6, 7):
        wait = vs.waiting_time(queue_len, ms(70))
        marker = "violates C" if wait > CONSTRAINT_US else "ok"
        print(f"  L={queue_len}: {wait / 1000:5.0f} ms  ({marker})")

    upscale = vs.switch_threshold(ms(16_000), ms(3600))
    print(f"\nupscaling threshold at C=16 s, D=3.6 s: T={upscale.value}")


if __name__ == "__main__":
    main()
