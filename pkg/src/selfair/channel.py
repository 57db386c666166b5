"""Finite-rate fading channels.

Every user sees an i.i.d. (over slots) rate drawn from a discrete distribution
over a finite alphabet. Users are independent of each other, so the joint law
of a slot's rate vector is the product of the per-user marginals.
"""

from dataclasses import dataclass, field
from functools import cmp_to_key

import numpy as np
from scipy.optimize import brentq

#: MCS-style rate table (bits/s/Hz) shared by every user in the cell scenario.
SHANNON_RATES = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 4.5)


def shannon_thresholds_db(rates):
    """SNR (dB) needed to sustain each rate, ``10 log10(2**r - 1)``; -inf for r=0."""
    with np.errstate(divide="ignore"):
        return tuple(float(v) for v in 10.0 * np.log10(np.exp2(np.asarray(rates, float)) - 1.0))


@dataclass(frozen=True)
class RateAlphabet:
    rates: tuple

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if not rates:
            raise ValueError("alphabet needs at least one rate")
        if rates[0] < 0 or any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"rates must be nonnegative and strictly increasing: {rates}")
        object.__setattr__(self, "rates", rates)

    def __len__(self):
        return len(self.rates)

    @property
    def values(self):
        return np.asarray(self.rates)


@dataclass(frozen=True)
class RateDistribution:
    """Probability mass function of one user's per-slot rate."""

    alphabet: RateAlphabet
    pmf: tuple

    def __post_init__(self):
        if not isinstance(self.alphabet, RateAlphabet):
            object.__setattr__(self, "alphabet", RateAlphabet(self.alphabet))
        pmf = tuple(float(p) for p in self.pmf)
        if len(pmf) != len(self.alphabet):
            raise ValueError("pmf and alphabet lengths differ")
        if any(p < 0 or p > 1 for p in pmf) or abs(sum(pmf) - 1.0) > 1e-12:
            raise ValueError(f"not a probability vector: {pmf}")
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def deterministic(cls, rate):
        return cls(RateAlphabet((rate,)), (1.0,))

    @property
    def values(self):
        return self.alphabet.values

    @property
    def probs(self):
        return np.asarray(self.pmf)

    @property
    def cdf(self):
        return np.cumsum(self.pmf)

    def mean(self):
        return float(self.values @ self.probs)

    def ccdf_at(self, x):
        """P(R > x) for each entry of ``x``."""
        x = np.atleast_1d(np.asarray(x, float))
        above = self.values[None, :] > x[:, None]
        return (above * self.probs[None, :]).sum(axis=1)

    def sample(self, rng, size=None):
        return self.values[_inverse_cdf(self.cdf, rng.random(size))]


@dataclass(frozen=True)
class ChannelRealization:
    rates: np.ndarray = field(repr=False)
    slot: int = 0


def _inverse_cdf(cdf, u):
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def sample_rates(users, rng, slot=0):
    """Draw one slot's rate vector, one independent draw per user.

    Consumes exactly ``len(users)`` uniforms from ``rng`` so that batch
    samplers (see :func:`rate_tables`) reproduce the same sequence.
    """
    if not users:
        raise ValueError("need at least one user")
    u = rng.random(len(users))
    rates = np.array([d.values[_inverse_cdf(d.cdf, ui)] for d, ui in zip(users, u)])
    return ChannelRealization(rates, slot)


def rate_tables(users):
    """Pad per-user alphabets into ``(values, cdf)`` arrays of shape (K, Lmax).

    Padding repeats the top rate with cdf 1, so the inverse-CDF lookup
    ``searchsorted(cdf[k], u, 'right')`` never lands in the padding.
    """
    lmax = max(len(d.alphabet) for d in users)
    values = np.zeros((len(users), lmax))
    cdf = np.ones((len(users), lmax))
    for k, d in enumerate(users):
        n = len(d.alphabet)
        values[k, :n] = d.values
        values[k, n:] = d.values[-1]
        cdf[k, :n] = d.cdf
    return values, cdf


def rayleigh_rate_distribution(mean_snr_db, alphabet=SHANNON_RATES, snr_thresholds_db=None):
    """Quantise an exponentially distributed SNR onto a rate alphabet.

    ``pmf[l] = P(th[l] <= SNR < th[l+1])``; the first bin also absorbs
    everything below ``th[0]``, so rate ``alphabet[0]`` acts as outage.
    Thresholds default to the Shannon-inverse SNRs of the alphabet.
    """
    if not isinstance(alphabet, RateAlphabet):
        alphabet = RateAlphabet(alphabet)
    if snr_thresholds_db is None:
        snr_thresholds_db = shannon_thresholds_db(alphabet.rates)
    th = np.asarray(snr_thresholds_db, float)
    if len(th) != len(alphabet):
        raise ValueError("need one threshold per rate")
    if np.any(np.diff(th) <= 0):
        raise ValueError("thresholds must be strictly ascending")
    mean_lin = 10.0 ** (mean_snr_db / 10.0)
    th_lin = 10.0 ** (th[1:] / 10.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ccdf = np.exp(-th_lin / mean_lin) if mean_lin > 0 else np.zeros_like(th_lin)
    ccdf = np.nan_to_num(ccdf, nan=0.0)
    upper = np.concatenate(([1.0], ccdf))
    lower = np.concatenate((ccdf, [0.0]))
    pmf = np.clip(upper - lower, 0.0, 1.0)
    return RateDistribution(alphabet, tuple(pmf))


def exponential_rate_distribution(mean_rate, levels=32):
    """Equal-probability quantisation of an exponential rate with given mean.

    Each of the ``levels`` bins carries mass ``1/levels`` and is represented
    by its conditional mean, so the mean rate is preserved exactly. Scaling
    ``mean_rate`` by 10^(-dB/10) scales every level, which is how a user
    "x dB weaker" is built.
    """
    if mean_rate <= 0:
        raise ValueError("mean_rate must be positive")
    edges = -np.log1p(-np.arange(levels) / levels)
    hi = np.append(edges[1:], np.inf)
    # E[X | a <= X < b] for X ~ Exp(1), bin mass 1/levels
    with np.errstate(invalid="ignore"):
        tail_hi = np.where(np.isinf(hi), 0.0, (hi + 1) * np.exp(-hi))
    cond = ((edges + 1) * np.exp(-edges) - tail_hi) * levels
    return RateDistribution(RateAlphabet(tuple(mean_rate * cond)), (1.0 / levels,) * levels)


def calibrate_mean_snr_db(target_mean_rate, alphabet=SHANNON_RATES, lo=-40.0, hi=60.0):
    """Mean SNR (dB) whose quantised Rayleigh rate has the requested mean."""
    top = max(alphabet)
    if not 0 < target_mean_rate < top:
        raise ValueError(f"target mean rate must lie in (0, {top})")
    return brentq(lambda s: rayleigh_rate_distribution(s, alphabet).mean() - target_mean_rate,
                  lo, hi, xtol=1e-12)


def _merged_ccdfs(a, b):
    grid = np.union1d(a.values, b.values)
    return a.ccdf_at(grid), b.ccdf_at(grid)


def stochastically_dominates(a, b, atol=1e-12):
    """True iff P(R_a > x) >= P(R_b > x) at every point of the merged support."""
    ca, cb = _merged_ccdfs(a, b)
    return bool(np.all(ca >= cb - atol))


def dominance_ordering(users):
    """Permutation listing users from stochastically strongest to weakest.

    Returns ``None`` when some pair is incomparable. Users with identical
    laws keep their index order.
    """
    k = len(users)
    dom = np.array([[stochastically_dominates(users[i], users[j]) for j in range(k)]
                    for i in range(k)])
    if not np.all(dom | dom.T):
        return None

    def cmp(i, j):
        if dom[i, j] and not dom[j, i]:
            return -1
        if dom[j, i] and not dom[i, j]:
            return 1
        return i - j

    return tuple(sorted(range(k), key=cmp_to_key(cmp)))


def expected_max_rate(users):
    """E[max_k R_k] for independent users, i.e. the max-sum throughput."""
    grid = np.unique(np.concatenate([d.values for d in users]))
    # P(max >= v) = 1 - prod_k P(R_k < v)
    below = np.ones_like(grid)
    for d in users:
        below *= 1.0 - d.ccdf_at(grid) - _pmf_at(d, grid)
    p_ge = 1.0 - below
    steps = np.diff(np.concatenate(([0.0], grid)))
    return float(p_ge @ steps)


def _pmf_at(d, grid):
    out = np.zeros_like(grid)
    idx = np.searchsorted(grid, d.values)
    np.add.at(out, idx, d.probs)
    return out


def random_ordered_users(rng, n_users, n_levels=3, alphabet=None, shuffle=True):
    """Random users whose rate laws are totally ordered by stochastic dominance.

    Draws one random complementary CDF per user on a common alphabet and sorts
    the values level by level, which keeps every curve nonincreasing while
    making them pointwise ordered. The user order is then shuffled.
    """
    if alphabet is None:
        alphabet = np.sort(rng.choice(np.arange(1, 9) * 0.5, size=n_levels, replace=False))
        alphabet[0] = 0.0 if rng.random() < 0.5 else alphabet[0]
    alphabet = RateAlphabet(tuple(alphabet))
    L = len(alphabet)
    # ccdf[k, l] = P(R_k >= rate_l) for l >= 1; P(R >= rate_0) = 1
    raw = np.sort(rng.random((n_users, L - 1)), axis=1)[:, ::-1]
    ccdf = -np.sort(-raw, axis=0)
    users = []
    for row in ccdf:
        ge = np.concatenate(([1.0], row, [0.0]))
        pmf = ge[:-1] - ge[1:]
        pmf[-1] = 1.0 - pmf[:-1].sum()
        users.append(RateDistribution(alphabet, tuple(pmf)))
    if shuffle:
        users = [users[i] for i in rng.permutation(n_users)]
    return users
