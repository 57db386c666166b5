"""Slot-level opportunistic schedulers.

Gradient-based scheduling (GBS) serves, in each slot, the user maximising
``R_k(t) * xbar_k(t) ** -alpha``. On top of it sit the GBS(S) experts, which
shadow-simulate the scheduler restricted to a user set S on the real channel
draws, and Selective GBS, which lets the best expert decide who may be served.

Two interfaces are provided. The ``*_step`` functions advance immutable state
objects one slot at a time. The ``run_*`` functions execute whole horizons in
compiled loops. Fed from the same generators they produce identical results.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .channel import rate_tables


@dataclass(frozen=True)
class ExpertState:
    members: tuple
    xbar: np.ndarray = field(repr=False)
    t: int = 0

    @classmethod
    def start(cls, members, n_users):
        return cls(tuple(members), np.zeros(n_users), 0)

    @property
    def total(self):
        return float(self.xbar[list(self.members)].sum())


@dataclass(frozen=True)
class SelectiveGbsState:
    order: tuple
    sizes: tuple
    expert_xbar: np.ndarray = field(repr=False)
    xbar_sel: np.ndarray = field(repr=False)
    chosen_set: tuple = ()
    t: int = 0

    @classmethod
    def start(cls, order, s_min=1):
        order = tuple(int(k) for k in order)
        if not 1 <= s_min <= len(order):
            raise ValueError("need 1 <= s_min <= number of users")
        sizes = tuple(range(s_min, len(order) + 1))
        n = len(order)
        return cls(order, sizes, np.zeros((len(sizes), n)), np.zeros(n))

    def experts(self):
        return [ExpertState(self.order[:s], self.expert_xbar[i].copy(), self.t)
                for i, s in enumerate(self.sizes)]


@dataclass(frozen=True)
class GbsState:
    xbar: np.ndarray = field(repr=False)
    t: int = 0

    @classmethod
    def start(cls, n_users):
        return cls(np.zeros(n_users), 0)


@dataclass(frozen=True)
class SchedulingDecision:
    served_user: int | None
    rate: float
    active_set: tuple


def gbs_weight(rate, xbar, alpha):
    """Scheduling weight ``rate * xbar**-alpha`` with the conventions at 0.

    A user with no accumulated throughput and a positive rate has infinite
    weight (for alpha > 0); a zero rate always has zero weight.
    """
    if rate <= 0:
        return 0.0
    if alpha == 0:
        return float(rate)
    if xbar <= 0:
        return math.inf
    return rate * xbar ** -alpha


def _decision(k, rates, active):
    if k < 0:
        return SchedulingDecision(None, 0.0, tuple(active))
    return SchedulingDecision(int(k), float(rates[k]), tuple(active))


def expert_step(state, real, alpha, rng):
    """Advance a GBS(S) expert by one slot; returns (new state, simulated user)."""
    if not state.members:
        raise ValueError("expert set is empty")
    xbar = state.xbar.copy()
    members = np.asarray(state.members, dtype=np.int64)
    k = _kernels.expert_slot(xbar, members, len(members), np.asarray(real.rates, float),
                             float(alpha), state.t, rng.random())
    return ExpertState(state.members, xbar, state.t + 1), (int(k) if k >= 0 else None)


def gbs_step(state, real, alpha, rng, active=None):
    """Plain GBS over ``active`` (all users by default)."""
    rates = np.asarray(real.rates, float)
    n = len(rates)
    active = tuple(range(n)) if active is None else tuple(active)
    xbar = state.xbar.copy()
    u = rng.random()
    if active:
        k = _kernels.choose(rates, xbar, float(alpha), np.asarray(active, dtype=np.int64),
                            len(active), u)
    else:
        k = -1
    _kernels.average_update(xbar, np.arange(n), n, k, rates[k] if k >= 0 else 0.0, state.t)
    return GbsState(xbar, state.t + 1), _decision(k, rates, active)


def threshold_policy_step(state, real, alpha, threshold_db, mean_snrs_db, rng):
    """GBS restricted to users whose mean SNR is at least ``threshold_db``."""
    active = [k for k, s in enumerate(mean_snrs_db) if s >= threshold_db]
    return gbs_step(state, real, alpha, rng, active)


def selective_gbs_step(state, real, alpha, rng, queue_bias=0.0):
    """One Selective GBS slot.

    Every expert advances on ``real`` first; the admitted set is the prefix
    maximising ``expert total + |S| * queue_bias`` (smaller set on ties), and
    the served user is the GBS choice inside it using the scheduler's own
    averages, never the experts'.
    """
    expert_xbar = state.expert_xbar.copy()
    xbar_sel = state.xbar_sel.copy()
    order = np.asarray(state.order, dtype=np.int64)
    sizes = np.asarray(state.sizes, dtype=np.int64)
    u = rng.random(len(sizes) + 1)
    k, e = _kernels.selective_slot(expert_xbar, xbar_sel, order, sizes,
                                   np.asarray(real.rates, float), float(alpha), state.t, u,
                                   float(queue_bias))
    chosen = state.order[:state.sizes[e]]
    new = replace(state, expert_xbar=expert_xbar, xbar_sel=xbar_sel, chosen_set=chosen,
                  t=state.t + 1)
    return new, _decision(k, real.rates, chosen)


# -- batch runners -----------------------------------------------------------

@dataclass
class GbsRun:
    xbar: np.ndarray
    bits: np.ndarray
    slots: int
    bits_at_checkpoint: float = 0.0
    checkpoint: int = 0

    @property
    def total(self):
        return float(self.bits.sum() / self.slots)


@dataclass
class SelectiveRun(GbsRun):
    expert_xbar: np.ndarray = None
    trace: np.ndarray = None
    order: tuple = ()
    sizes: tuple = ()

    def expert_totals(self):
        return np.array([self.expert_xbar[i, list(self.order[:s])].sum()
                         for i, s in enumerate(self.sizes)])

    def limiting_set(self, tail=0.1):
        """Most frequent admitted prefix over the last ``tail`` fraction of slots."""
        last = self.trace[int(len(self.trace) * (1 - tail)):]
        size = int(np.bincount(last).argmax())
        return tuple(sorted(self.order[:size]))


def _checkpoint(slots, window=1000):
    return slots - window if slots > window else slots // 2


def run_gbs(users, alpha, slots, rng_fading=None, rng_tie=None, active=None,
            u_rates=None, u_tie=None):
    """Run GBS for ``slots`` slots; uniforms may be passed in for common random numbers."""
    values, cdf = rate_tables(users)
    if u_rates is None:
        u_rates = rng_fading.random((slots, len(users)))
    if u_tie is None:
        u_tie = rng_tie.random(slots)
    members = np.arange(len(users)) if active is None else np.asarray(active, dtype=np.int64)
    cp = _checkpoint(slots)
    xbar, bits, at_cp = _kernels.gbs_run(values, cdf, u_rates, u_tie, float(alpha),
                                         members.astype(np.int64), cp)
    return GbsRun(xbar, bits, slots, at_cp, cp)


def run_selective_gbs(users, alpha, slots, order, s_min=1, rng_fading=None, rng_tie=None,
                      queue_bias=0.0, u_rates=None, u_tie=None, sizes=None):
    """Run Selective GBS with experts on the prefixes of ``order``."""
    values, cdf = rate_tables(users)
    order = np.asarray(order, dtype=np.int64)
    if sizes is None:
        sizes = np.arange(s_min, len(order) + 1, dtype=np.int64)
    sizes = np.asarray(sizes, dtype=np.int64)
    if u_rates is None:
        u_rates = rng_fading.random((slots, len(users)))
    if u_tie is None:
        u_tie = rng_tie.random((slots, len(sizes) + 1))
    cp = _checkpoint(slots)
    xbar, exp_xbar, bits, trace, at_cp = _kernels.selective_run(
        values, cdf, u_rates, u_tie, float(alpha), order, sizes, float(queue_bias), cp)
    return SelectiveRun(xbar, bits, slots, at_cp, cp, exp_xbar, trace,
                        tuple(int(k) for k in order), tuple(int(s) for s in sizes))
