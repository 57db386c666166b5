"""Admission control across spatial realizations.

Thirty subscribers, each active with probability 0.1, land uniformly in a
cell whose edge sits at -5 dB. Fixed SNR thresholds trade admission for
throughput blindly; the online selective-fair controller (OSF) blocks only
when the users present make it worthwhile, and its virtual queue keeps the
long-run admission rate at 1 - epsilon.
"""

import os

from selfair import ScenarioConfig, run_experiment
from selfair.sim import DEFAULT_POLICIES

cfg = ScenarioConfig()
report = run_experiment(cfg, DEFAULT_POLICIES, pof_alphas=(0.5, 1.0, 2.0),
                        parallel=os.cpu_count())
eps = cfg.sla.epsilon
print(f"{'policy':<20} {'throughput':>10} {'admission':>10} {'SLA':>5}")
for name, r in report.policies.items():
    print(f"{name:<20} {r.throughput:10.4f} {r.admission:10.4f} "
          f"{'yes' if r.sla_satisfied(eps) else 'no':>5}")

best = report.best_threshold()
osf = report.policies["osf"]
print(f"\nOSF vs best SLA-satisfying threshold ({best.policy}): "
      f"{100 * (osf.throughput / best.throughput - 1):+.1f}%")
print("same fading draws for every policy:", report.common_random_numbers())

print("\nprice of fairness")
for alpha, table in report.pof_by_alpha.items():
    print(f"  alpha {alpha}: " + ", ".join(f"{n} {v:.3f}" for n, v in table.items()))
