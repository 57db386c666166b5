"""Fair points, the price of fairness, and what blocking a user buys.

Two users with constant rates 2 and 1 are the smallest case where fairness
costs throughput: proportional fairness splits time evenly, losing a quarter
of the max-sum rate. Serving only the strong user restores it.
"""

import numpy as np

from selfair import (FairnessSpec, RateDistribution, dominance_ordering, minimize_pof_brute,
                     minimize_pof_monotone, price_of_fairness, rayleigh_rate_distribution,
                     solve_num)
from selfair.oracle import subset_solutions

users = [RateDistribution.deterministic(2.0), RateDistribution.deterministic(1.0)]
pf = FairnessSpec(1.0)
sol = solve_num(users, pf)
print("proportional fair point", sol.point, "total", sol.total)
print("price of fairness", price_of_fairness(users, pf))
best = minimize_pof_brute(users, pf)
print("best subset", best.set.members, "total", best.total)

# Rayleigh users on the Shannon rate table: the fair point moves toward
# max-min as alpha grows, and the total falls
snrs = [12.0, 4.0, -2.0, -8.0]
cell = [rayleigh_rate_distribution(s) for s in snrs]
print("\nmean SNRs (dB)", snrs)
for alpha in (0.0, 0.5, 1.0, 2.0, 10.0):
    s = solve_num(cell, FairnessSpec(alpha))
    print(f"alpha {alpha:>4}: x = {np.round(s.point, 3)}  total {s.total:.3f}  "
          f"PoF {price_of_fairness(cell, FairnessSpec(alpha)):.3f}")

# the users are stochastically ordered, so only prefixes of the order need checking
sigma = dominance_ordering(cell)
sols = subset_solutions(cell, pf)
print("\nT(S) for every subset at alpha = 1")
for us in sorted(sols, key=lambda u: -sols[u].total)[:6]:
    print(f"  {str(us.members):<14} {sols[us].total:.4f}")
mono = minimize_pof_monotone(cell, pf, 1, sigma)
print("prefix search picks", mono.set.members, "exhaustive search picks",
      minimize_pof_brute(cell, pf).set.members)
