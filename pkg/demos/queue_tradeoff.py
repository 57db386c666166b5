"""The V knob: closer to the best admission rule, at the price of a longer queue.

Realization types with known selective-fair throughput tables make the
offline optimum an LP; drift-plus-penalty approaches it as V grows while the
virtual queue keeps the admission constraint.
"""

from selfair._rng import stream
from selfair.sla import SlaSpec, build_table_benchmark, offline_optimum, run_dpp

bench = build_table_benchmark(stream(3, "benchmark"), n_types=12, max_users=4)
for eps in (0.02, 0.05, 0.1):
    opt = offline_optimum(bench, eps)
    print(f"epsilon {eps}: offline optimum {opt:.4f}")
    for v in (0.3, 1.0, 3.0, 10.0, 30.0, 100.0):
        r = run_dpp(bench, SlaSpec(eps, v), 200_000, stream(3, "types"), stream(3, "arrivals"))
        print(f"  V {v:>5}: throughput/optimum {r.throughput / opt:.4f}  "
              f"admitted {r.admitted_fraction:.4f}  Q/N {r.queue_over_n:.5f}")
