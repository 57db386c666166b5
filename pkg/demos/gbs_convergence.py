"""The slot-level scheduler tracks the offline fair point.

GBS serves whoever maximises rate * average^-alpha; its running averages
converge to the alpha-fair throughputs computed offline. Selective GBS
additionally learns which prefix of users is worth serving.
"""

import numpy as np

from selfair import (FairnessSpec, dominance_ordering, minimize_pof_brute,
                     rayleigh_rate_distribution, run_gbs, run_selective_gbs, solve_num)
from selfair._rng import stream

users = [rayleigh_rate_distribution(s) for s in (10.0, 5.0, 0.0, -5.0)]
for alpha in (0.5, 1.0, 2.0):
    target = solve_num(users, FairnessSpec(alpha)).point
    print(f"alpha {alpha}")
    for slots in (2_000, 20_000, 200_000):
        run = run_gbs(users, alpha, slots, stream(0, "fading"), stream(0, "tie"))
        err = np.max(np.abs(run.xbar - target) / target)
        print(f"  {slots:>7} slots: max relative error {err:.4f}")

# a strong user and three much weaker ones: proportional fairness is costly
users = [rayleigh_rate_distribution(s) for s in (15.0, -6.0, -8.0, -10.0)]
spec = FairnessSpec(1.0)
best = minimize_pof_brute(users, spec)
run = run_selective_gbs(users, 1.0, 200_000, dominance_ordering(users), 1, stream(1, "fading"),
                        stream(1, "tie"))
print("\nbest subset", best.set.members, f"T = {best.total:.4f}")
print("selective GBS settles on", run.limiting_set(), f"total {run.total:.4f}")
print("expert totals per prefix size", np.round(run.expert_totals(), 4))
