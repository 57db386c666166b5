"""Admission control across spatial realizations.

A virtual queue accumulates the users that should have been admitted
(``A(n)``, which equals the active count with probability ``1 - eps``) and
drains by the number actually admitted (``D(n)``). Drift-plus-penalty picks,
in each realization, the set maximising throughput plus ``Q/V`` per admitted
user; OSF does the same with the throughputs estimated online by the
Selective GBS expert bank.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .channel import SHANNON_RATES, rayleigh_rate_distribution
from .oracle import FairnessSpec, joint_states, solve_num
from .schedulers import run_selective_gbs


@dataclass(frozen=True)
class SlaSpec:
    epsilon: float = 0.05
    v: float = 10.0

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if not self.v > 0:
            raise ValueError("V must be positive")


@dataclass(frozen=True)
class VirtualQueueState:
    q: float = 0.0
    n: int = 0
    history: tuple = None     # ((A, D, Q after update), ...) when recording

    @classmethod
    def start(cls, record=False):
        return cls(0.0, 0, () if record else None)


@dataclass(frozen=True)
class AdmissionDecision:
    admitted: tuple
    realization: object = None


def queue_arrival(n_active, epsilon, rng):
    """A(n): the active count with probability ``1 - epsilon``, else 0.

    One uniform is consumed per call whatever the outcome, so the arrival
    stream stays aligned across policies.
    """
    n_active = len(n_active.active) if hasattr(n_active, "active") else int(n_active)
    return float(n_active) if rng.random() >= epsilon else 0.0


def queue_update(state, a, d):
    if a < 0 or d < 0:
        raise ValueError("arrivals and departures must be nonnegative")
    q = max(0.0, state.q + a - d)
    hist = None if state.history is None else state.history + ((a, d, q),)
    return VirtualQueueState(q, state.n + 1, hist)


def _set_key(s):
    s = tuple(s)
    return (len(s), s)


def dpp_select(table, active=None, q=0.0, v=1.0):
    """Set maximising ``T(S) + (q / v) |S|`` among the candidates in ``table``.

    ``table`` maps tuples of user indices to throughput. Ties go to the
    smaller set, then the lexicographically first one.
    """
    if not table:
        raise ValueError("empty throughput table")
    bias = q / v
    best, best_val = None, -np.inf
    for s in sorted(table, key=_set_key):
        if active is not None and not set(s) <= set(active):
            continue
        val = table[s] + bias * len(s)
        if val > best_val:
            best, best_val = tuple(s), val
    if best is None:
        raise ValueError("no candidate set inside the active users")
    return AdmissionDecision(best)


@dataclass(frozen=True)
class OsfState:
    queue: VirtualQueueState
    sla: SlaSpec

    @classmethod
    def start(cls, sla, record=False):
        return cls(VirtualQueueState.start(record), sla)

    @property
    def queue_bias(self):
        return self.queue.q / self.sla.v


def osf_realization(state, users, alpha, sigma, slots, rng_tie=None, rng_arrival=None,
                    u_rates=None, u_tie=None, rng_fading=None):
    """Run one realization of the online selective-fair controller.

    The expert bank covers every prefix of ``sigma`` (sizes 1..K) with bias
    ``Q/V``; experts and averages start from zero. ``D(n)`` is the size of
    the set chosen in the final slot, and the queue is advanced with a fresh
    arrival draw. Returns ``(new state, run or None, D)``.
    """
    n_active = len(users)
    a = queue_arrival(n_active, state.sla.epsilon, rng_arrival)
    if n_active == 0:
        return OsfState(queue_update(state.queue, a, 0.0), state.sla), None, 0
    run = run_selective_gbs(users, alpha, slots, sigma, 1, rng_fading, rng_tie,
                            queue_bias=state.queue_bias, u_rates=u_rates, u_tie=u_tie)
    d = int(run.trace[-1])
    return OsfState(queue_update(state.queue, a, float(d)), state.sla), run, d


# -- known-table benchmark ---------------------------------------------------------

@dataclass
class TableBenchmark:
    """Realization types with known prefix throughputs.

    ``tables[m][j]`` is the selective-fair total of the best ``j`` users of a
    type-``m`` realization (``j = 0..K_m``, entry 0 is 0); types occur with
    probabilities ``probs``.
    """

    tables: list
    probs: np.ndarray

    @property
    def sizes(self):
        return np.array([len(t) - 1 for t in self.tables])

    def mean_active(self):
        return float(self.probs @ self.sizes)


def build_table_benchmark(rng, n_types=12, max_users=4, alpha=1.0, snr_range_db=(-5.0, 20.0),
                          rates=SHANNON_RATES):
    """Random realization types with prefix tables from the offline solver.

    Each type has 1..max_users Rayleigh users with uniform mean SNRs; the
    table holds T of every prefix of the users sorted by mean SNR.
    """
    tables = []
    spec = FairnessSpec(alpha)
    for _ in range(n_types):
        k = int(rng.integers(1, max_users + 1))
        snrs = np.sort(rng.uniform(*snr_range_db, size=k))[::-1]
        users = [rayleigh_rate_distribution(s, rates) for s in snrs]
        states = joint_states(users)
        row = [0.0] + [solve_num(users, spec, tuple(range(j)), states=states).total
                       for j in range(1, k + 1)]
        tables.append(row)
    return TableBenchmark(tables, np.full(n_types, 1.0 / n_types))


@dataclass
class DppResult:
    throughput: float
    admitted_fraction: float
    queue_over_n: float
    sizes: np.ndarray


def run_dpp(bench, sla, n_realizations, rng_types, rng_arrival, allow_empty=False):
    """Drift-plus-penalty over ``n_realizations`` realizations with known tables."""
    types = rng_types.choice(len(bench.tables), size=n_realizations, p=bench.probs)
    arrive = rng_arrival.random(n_realizations) >= sla.epsilon
    sizes = bench.sizes
    q = 0.0
    bits = admitted = active = 0.0
    chosen = np.zeros(n_realizations, dtype=int)
    lo = 0 if allow_empty else 1
    for n, m in enumerate(types):
        table = bench.tables[m]
        k = sizes[m]
        j = lo
        best = -np.inf
        for jj in range(lo, k + 1):
            val = table[jj] + q / sla.v * jj
            if val > best:
                best, j = val, jj
        chosen[n] = j
        bits += table[j]
        admitted += j
        active += k
        q = max(0.0, q + (k if arrive[n] else 0) - j)
    return DppResult(bits / n_realizations, admitted / active, q / n_realizations, chosen)


def offline_optimum(bench, epsilon, allow_empty=False):
    """Best stationary randomised admission rule meeting the SLA on average (LP)."""
    cols = []
    cost = []
    for m, table in enumerate(bench.tables):
        for j in range(0 if allow_empty else 1, len(table)):
            cols.append((m, j))
            cost.append(-bench.probs[m] * table[j])
    n_types = len(bench.tables)
    a_eq = np.zeros((n_types, len(cols)))
    a_ub = np.zeros((1, len(cols)))
    for i, (m, j) in enumerate(cols):
        a_eq[m, i] = 1.0
        a_ub[0, i] = -bench.probs[m] * j
    res = linprog(cost, A_ub=a_ub, b_ub=[-(1 - epsilon) * bench.mean_active()], A_eq=a_eq,
                  b_eq=np.ones(n_types), bounds=(0, 1), method="highs")
    if res.status != 0:
        raise ValueError(f"offline problem infeasible: {res.message}")
    return float(-res.fun)
