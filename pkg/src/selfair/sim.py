"""Two-time-scale cell simulation.

Each realization draws which subscribers are active and where they sit in the
cell; the fading then runs for ``slots_per_realization`` slots under a
policy. All policies of one experiment consume the same spatial, fading and
arrival streams (common random numbers); only their tie-break streams differ.
"""

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import stream
from .channel import (SHANNON_RATES, calibrate_mean_snr_db, expected_max_rate,
                      exponential_rate_distribution, rayleigh_rate_distribution)
from .schedulers import _checkpoint, run_gbs, run_selective_gbs
from .sla import OsfState, SlaSpec, osf_realization, queue_arrival


@dataclass(frozen=True)
class SpatialRealization:
    active: tuple
    mean_snrs_db: np.ndarray = field(repr=False)
    slots: int = 1
    index: int = 0

    def __post_init__(self):
        if len(self.active) != len(self.mean_snrs_db):
            raise ValueError("need one mean SNR per active user")
        if self.slots < 1:
            raise ValueError("slots must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    population: int = 30
    activity_prob: float = 0.1
    cell_edge_snr_db: float = -5.0
    pathloss_exponent: float = 3.5
    min_radius: float = 0.05
    slots_per_realization: int = 1500
    realizations: int = 1000
    alpha: float = 1.0
    sla: SlaSpec = SlaSpec(0.05, 30.0)
    master_seed: int = 1
    rates: tuple = SHANNON_RATES
    drift_window: int = 1000
    drift_limit: float = 0.05

    def __post_init__(self):
        if not 0 <= self.activity_prob <= 1:
            raise ValueError("activity_prob must lie in [0, 1]")
        for name in ("population", "slots_per_realization", "realizations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not 0 < self.min_radius <= 1:
            raise ValueError("min_radius must lie in (0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not isinstance(self.sla, SlaSpec):
            object.__setattr__(self, "sla", SlaSpec(**self.sla))

    def mean_snr_db(self, radius):
        r = np.maximum(np.asarray(radius, float), self.min_radius)
        return self.cell_edge_snr_db + 10 * self.pathloss_exponent * np.log10(1 / r)

    def radius_for_snr(self, snr_db):
        return 10 ** ((self.cell_edge_snr_db - snr_db) / (10 * self.pathloss_exponent))

    def sla_threshold_db(self):
        """Mean-SNR threshold that blocks exactly a fraction epsilon of positions."""
        return float(self.mean_snr_db(math.sqrt(1 - self.sla.epsilon)))


def sample_spatial(config, rng, index=0):
    """Active set and mean SNRs for one realization.

    Every subscriber gets an activity draw and a uniform position on the unit
    disk (radius ``sqrt(U)``), so the stream advances by the same amount
    whatever the outcome.
    """
    u = rng.random((2, config.population))
    active = np.flatnonzero(u[0] < config.activity_prob)
    radius = np.sqrt(u[1, active])
    return SpatialRealization(tuple(int(k) for k in active), config.mean_snr_db(radius),
                              config.slots_per_realization, index)


@dataclass(frozen=True)
class Policy:
    kind: str                    # no-admission, threshold, selective-gbs, osf
    threshold_db: float = None

    @property
    def name(self):
        if self.kind == "threshold":
            return f"threshold{self.threshold_db:+g}dB"
        return self.kind

    @property
    def tie_key(self):
        # a threshold that blocks nobody is the no-admission policy, draws included
        if self.kind == "threshold" and self.threshold_db == -math.inf:
            return "no-admission"
        return self.name

    @classmethod
    def parse(cls, text, config=None):
        text = text.strip()
        if text in ("no-admission", "selective-gbs", "osf"):
            return cls(text)
        if text.startswith("threshold"):
            arg = text[len("threshold"):].lstrip(":").removesuffix("dB").strip()
            if arg == "sla":
                if config is None:
                    raise ValueError("threshold:sla needs the scenario")
                return cls("threshold", round(config.sla_threshold_db(), 4))
            return cls("threshold", -math.inf if arg in ("-inf", "") else float(arg))
        raise ValueError(f"unknown policy {text!r}")


DEFAULT_POLICIES = ("no-admission", "threshold:-4.95", "threshold:-3", "threshold:-1",
                    "threshold:sla", "osf")


@dataclass
class RealizationMetrics:
    per_user_bits: np.ndarray       # summed over slots, one entry per active user
    admitted: np.ndarray            # bool per active user
    total_throughput: float
    chosen_set_trace: np.ndarray = field(default=None, repr=False)
    queue_value: float = 0.0
    drift: float = 0.0
    max_sum: float = 0.0            # E[max rate] of the active users


def _drift(run, window):
    total = run.bits.sum() / run.slots
    cp = _checkpoint(run.slots, window)
    if total <= 0 or cp <= 0:
        return 0.0
    return abs(total - run.bits_at_checkpoint / cp) / total


def run_realization(policy, realization, config, rng_tie, u_rates, users=None, osf=None,
                    rng_arrival=None):
    """Run one realization under ``policy``; returns (metrics, new OSF state).

    ``u_rates`` holds the realization's fading uniforms (slots x active).
    """
    k = len(realization.active)
    snr = np.asarray(realization.mean_snrs_db)
    if users is None:
        users = [rayleigh_rate_distribution(s, config.rates) for s in snr]
    slots = realization.slots
    order = np.argsort(-snr, kind="stable")
    queue = 0.0
    trace = None
    if policy.kind == "osf":
        osf, run, d = osf_realization(osf, users, config.alpha, order, slots, rng_tie,
                                      rng_arrival, u_rates=u_rates)
        queue = osf.queue.q
        if run is None:
            return RealizationMetrics(np.zeros(0), np.zeros(0, bool), 0.0, queue_value=queue), osf
        admitted = np.zeros(k, bool)
        admitted[order[:d]] = True
        trace = run.trace
    elif k == 0:
        return RealizationMetrics(np.zeros(0), np.zeros(0, bool), 0.0), osf
    elif policy.kind == "selective-gbs":
        run = run_selective_gbs(users, config.alpha, slots, order, 1, None, rng_tie,
                                u_rates=u_rates)
        admitted = np.zeros(k, bool)
        admitted[order[:run.trace[-1]]] = True
        trace = run.trace
    else:
        if policy.kind == "threshold":
            admitted = snr >= policy.threshold_db
        elif policy.kind == "no-admission":
            admitted = np.ones(k, bool)
        else:
            raise ValueError(f"unknown policy kind {policy.kind!r}")
        run = run_gbs(users, config.alpha, slots, None, rng_tie, np.flatnonzero(admitted),
                      u_rates=u_rates)
    return RealizationMetrics(run.bits, admitted, float(run.bits.sum() / slots), trace, queue,
                              _drift(run, config.drift_window),
                              expected_max_rate(users)), osf


@dataclass
class PolicyReport:
    policy: str
    admission_running: np.ndarray     # pooled admitted / active user-realizations so far
    throughput_running: np.ndarray    # mean realization throughput so far
    queue: np.ndarray
    admitted_counts: np.ndarray       # per subscriber
    active_counts: np.ndarray
    drift_flags: int
    pof: float
    fading_digest: str

    @property
    def admission(self):
        return float(self.admission_running[-1])

    @property
    def throughput(self):
        return float(self.throughput_running[-1])

    def per_user_admission(self):
        seen = self.active_counts > 0
        return self.admitted_counts[seen] / self.active_counts[seen]

    def sla_satisfied(self, epsilon, slack=0.01):
        return self.admission >= 1 - epsilon - slack


def _series_mean(x):
    return np.cumsum(x) / np.arange(1, len(x) + 1)


def run_policy(config, policy):
    """Simulate every realization of ``config`` under one policy."""
    if isinstance(policy, str):
        policy = Policy.parse(policy, config)
    seed = config.master_seed
    rng_spatial = stream(seed, "spatial")
    rng_fading = stream(seed, "fading")
    rng_arrival = stream(seed, "arrivals")
    rng_tie = stream(seed, "tie/" + policy.tie_key)
    digest = hashlib.sha256()
    n_real = config.realizations
    throughput = np.zeros(n_real)
    max_sum = np.zeros(n_real)
    queue = np.zeros(n_real)
    adm = np.zeros(n_real)
    act = np.zeros(n_real)
    admitted_counts = np.zeros(config.population, dtype=np.int64)
    active_counts = np.zeros(config.population, dtype=np.int64)
    flags = 0
    osf = OsfState.start(config.sla)
    for n in range(n_real):
        real = sample_spatial(config, rng_spatial, n)
        u_rates = rng_fading.random((real.slots, len(real.active)))
        digest.update(u_rates.tobytes())
        if policy.kind == "osf":
            m, osf = run_realization(policy, real, config, rng_tie, u_rates, osf=osf,
                                     rng_arrival=rng_arrival)
        else:
            # keep the arrival stream aligned with the controller's
            queue_arrival(len(real.active), config.sla.epsilon, rng_arrival)
            m, _ = run_realization(policy, real, config, rng_tie, u_rates)
        throughput[n] = m.total_throughput
        max_sum[n] = m.max_sum
        queue[n] = m.queue_value
        adm[n] = m.admitted.sum()
        act[n] = len(real.active)
        ids = np.asarray(real.active, dtype=int)
        active_counts[ids] += 1
        admitted_counts[ids[m.admitted]] += 1
        flags += int(m.drift > config.drift_limit)
    cum_act = np.cumsum(act)
    with np.errstate(invalid="ignore", divide="ignore"):
        admission = np.where(cum_act > 0, np.cumsum(adm) / np.maximum(cum_act, 1), 1.0)
    pof = 1 - throughput.sum() / max_sum.sum() if max_sum.sum() > 0 else 0.0
    return PolicyReport(policy.name, admission, _series_mean(throughput), queue,
                        admitted_counts, active_counts, flags, float(pof), digest.hexdigest())


@dataclass
class ExperimentReport:
    config: ScenarioConfig
    policies: dict                 # name -> PolicyReport
    pof_by_alpha: dict = None      # alpha -> {name: pof}
    by_alpha: dict = None          # alpha -> {name: PolicyReport}

    def common_random_numbers(self):
        return len({r.fading_digest for r in self.policies.values()}) == 1

    def best_threshold(self, epsilon=None, slack=0.01, alpha=None):
        """SLA-satisfying threshold policy with the highest throughput, or None."""
        eps = self.config.sla.epsilon if epsilon is None else epsilon
        reports = self.policies if alpha is None else self.by_alpha[float(alpha)]
        ok = [r for name, r in reports.items()
              if name.startswith("threshold") and r.sla_satisfied(eps, slack)]
        return max(ok, key=lambda r: r.throughput, default=None)


def _job(args):
    config, policy = args
    return run_policy(config, policy)


def _map(jobs, parallel):
    if parallel and parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(parallel, len(jobs))) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def run_experiment(config, policies=DEFAULT_POLICIES, pof_alphas=None, parallel=1):
    """Run all ``policies`` on common random numbers.

    With ``pof_alphas`` the whole comparison is repeated at each alpha and
    the price of fairness per policy is collected.
    """
    policies = [p if isinstance(p, Policy) else Policy.parse(p, config) for p in policies]
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise ValueError("duplicate policies")
    alphas = list(pof_alphas or [])
    runs = [config] + [replace(config, alpha=float(a)) for a in alphas if a != config.alpha]
    jobs = [(c, p) for c in runs for p in policies]
    results = _map(jobs, parallel)
    by_cfg = {}
    for (c, p), r in zip(jobs, results):
        by_cfg.setdefault(c.alpha, {})[p.name] = r
    report = ExperimentReport(config, by_cfg[config.alpha], by_alpha=by_cfg)
    if alphas:
        report.pof_by_alpha = {float(a): {n: r.pof for n, r in by_cfg[float(a)].items()}
                               for a in alphas}
    return report


# -- price of fairness with weak users --------------------------------------------

def weak_user_population(n_strong, n_weak, offset_db=20.0, model="exponential", levels=64,
                         mean_rate=1.0, rates=SHANNON_RATES):
    """Strong users with mean rate ``mean_rate`` plus users ``offset_db`` weaker.

    ``model="exponential"`` quantises an exponential rate and scales it by
    ``10**(-offset_db/10)`` for weak users; ``model="rayleigh"`` maps
    exponential SNRs through the rate table, with the strong users' mean SNR
    calibrated to ``mean_rate`` and weak users ``offset_db`` lower.
    """
    if model == "exponential":
        strong = exponential_rate_distribution(mean_rate, levels)
        weak = exponential_rate_distribution(mean_rate * 10 ** (-offset_db / 10), levels)
    elif model == "rayleigh":
        snr = calibrate_mean_snr_db(mean_rate, rates)
        strong = rayleigh_rate_distribution(snr, rates)
        weak = rayleigh_rate_distribution(snr - offset_db, rates)
    else:
        raise ValueError(f"unknown rate model {model!r}")
    return [strong] * n_strong + [weak] * n_weak


def one_minus_pof_gbs(users, alpha, slots, seed, label=""):
    """Long-run GBS total over the exact max-sum throughput."""
    if alpha == 0:
        return 1.0
    run = run_gbs(users, alpha, slots, stream(seed, "fading/" + label), stream(seed, "tie/" + label))
    return run.total / expected_max_rate(users)


def _pof_job(args):
    m, alpha, n_strong, offset_db, model, levels, mean_rate, slots, seed = args
    users = weak_user_population(n_strong, m, offset_db, model, levels, mean_rate)
    return m, alpha, one_minus_pof_gbs(users, alpha, slots, seed, f"m{m}")


def pof_curve(n_strong=10, max_weak=10, offset_db=20.0, alphas=(0.0, 1.0, 10.0), slots=200_000,
              seed=1, model="exponential", levels=64, mean_rate=1.0, parallel=1):
    """Rows ``(m, alpha, 1 - PoF)`` for m = 0..max_weak weak users."""
    jobs = [(m, float(a), n_strong, offset_db, model, levels, mean_rate, slots, seed)
            for m in range(max_weak + 1) for a in alphas]
    if parallel and parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_pof_job, jobs))
    return [_pof_job(j) for j in jobs]
