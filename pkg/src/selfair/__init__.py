"""Selective fairness for opportunistic downlink scheduling.

Offline fair-point solvers, slot-level gradient schedulers with expert-based
user selection, queue-driven admission control and a two-time-scale cell
simulator.
"""

from .channel import (SHANNON_RATES, ChannelRealization, RateAlphabet, RateDistribution,
                      calibrate_mean_snr_db, dominance_ordering, expected_max_rate,
                      exponential_rate_distribution, random_ordered_users,
                      rayleigh_rate_distribution, sample_rates, stochastically_dominates)
from .oracle import (FairnessSpec, SelectiveFairSolution, StateSpaceTooLarge,
                     TimeSharingPolicy, UserSet, brute_force_num, check_throughput_monotonicity,
                     max_min_throughput, minimize_pof_brute, minimize_pof_monotone,
                     price_of_fairness, solve_num, throughput_of)
from .schedulers import (ExpertState, GbsState, SchedulingDecision, SelectiveGbsState,
                         expert_step, gbs_step, gbs_weight, run_gbs, run_selective_gbs,
                         selective_gbs_step, threshold_policy_step)
from .sim import (Policy, ScenarioConfig, SpatialRealization, pof_curve, run_experiment,
                  run_policy, run_realization, sample_spatial)
from .sla import (AdmissionDecision, OsfState, SlaSpec, VirtualQueueState, dpp_select,
                  osf_realization, queue_arrival, queue_update)

__version__ = "0.1.0"
