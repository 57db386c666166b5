"""How much sum throughput proportional fairness gives up to weak users.

Ten users with mean rate 1 share the cell with m users 20 dB weaker. Each
weak user pulls a share of airtime it can barely use, so 1 - PoF drops with
m; max-min (alpha = 10 as a proxy) drops much faster.
"""

import os

from selfair import pof_curve

rows = pof_curve(n_strong=10, max_weak=10, alphas=(0.0, 1.0, 10.0), slots=200_000,
                 parallel=os.cpu_count())
table = {(m, a): v for m, a, v in rows}
print(" m   alpha=0  alpha=1  alpha=10")
for m in range(11):
    print(f"{m:2d}   {table[(m, 0.0)]:.3f}    {table[(m, 1.0)]:.3f}    {table[(m, 10.0)]:.3f}")
