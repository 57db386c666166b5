import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfair import (SHANNON_RATES, RateAlphabet, RateDistribution, calibrate_mean_snr_db,
                     dominance_ordering, expected_max_rate, exponential_rate_distribution,
                     random_ordered_users, rayleigh_rate_distribution, sample_rates,
                     stochastically_dominates)
from selfair.channel import rate_tables, shannon_thresholds_db


def test_alphabet_validation():
    with pytest.raises(ValueError):
        RateAlphabet((1.0, 0.5))
    with pytest.raises(ValueError):
        RateDistribution((0.0, 1.0), (0.7, 0.7))
    with pytest.raises(ValueError):
        RateDistribution((0.0, 1.0), (1.0,))


def test_degenerate_draws(rng):
    assert sample_rates([RateDistribution.deterministic(2.0)], rng).rates.tolist() == [2.0]
    top = RateDistribution(SHANNON_RATES, (0,) * 7 + (1,))
    assert sample_rates([top, top], rng).rates.tolist() == [4.5, 4.5]


def test_sampling_frequency(rng):
    d = RateDistribution((1.0, 2.0), (0.5, 0.5))
    draws = d.sample(rng, 100_000)
    assert abs(np.mean(draws == 2.0) - 0.5) < 0.01


def test_slot_draw_matches_batch_tables():
    users = [rayleigh_rate_distribution(s) for s in (-3.0, 4.0, 11.0)]
    values, cdf = rate_tables(users)
    a, b = np.random.default_rng(7), np.random.default_rng(7)
    for _ in range(50):
        slot = sample_rates(users, a).rates
        u = b.random(len(users))
        idx = [np.searchsorted(cdf[k], u[k], side="right") for k in range(len(users))]
        assert slot.tolist() == [values[k, i] for k, i in enumerate(idx)]


def test_rayleigh_limits():
    hi = rayleigh_rate_distribution(200.0)
    lo = rayleigh_rate_distribution(-200.0)
    assert hi.pmf[-1] == pytest.approx(1.0)
    assert lo.pmf[0] == pytest.approx(1.0)


def test_rayleigh_single_threshold():
    d = rayleigh_rate_distribution(0.0, (0.0, 1.0), snr_thresholds_db=(-100.0, 0.0))
    assert d.pmf == pytest.approx((1 - math.exp(-1), math.exp(-1)), abs=1e-14)


def test_shannon_thresholds():
    th = shannon_thresholds_db(SHANNON_RATES)
    assert th[0] == -math.inf
    assert th[2] == pytest.approx(0.0)
    assert th[4] == pytest.approx(10 * math.log10(3))


@given(st.floats(-30, 40))
def test_rayleigh_pmf_is_a_distribution(snr):
    d = rayleigh_rate_distribution(snr)
    assert min(d.pmf) >= 0
    assert sum(d.pmf) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40)
@given(st.floats(-30, 40), st.floats(0.01, 20))
def test_higher_mean_snr_dominates(snr, gap):
    assert stochastically_dominates(rayleigh_rate_distribution(snr + gap),
                                    rayleigh_rate_distribution(snr))


def test_dominance_basics():
    a = rayleigh_rate_distribution(5.0)
    assert stochastically_dominates(a, a)
    top = RateDistribution(SHANNON_RATES, (0,) * 7 + (1,))
    assert stochastically_dominates(top, rayleigh_rate_distribution(30.0))
    assert stochastically_dominates(rayleigh_rate_distribution(5.0),
                                    rayleigh_rate_distribution(-5.0))


def test_ordering_examples():
    users = [rayleigh_rate_distribution(s) for s in (0.0, -10.0, 10.0)]
    # 0-based: strongest is index 2, then 0, then 1
    assert dominance_ordering(users) == (2, 0, 1)
    same = rayleigh_rate_distribution(3.0)
    assert dominance_ordering([same, same, same]) == (0, 1, 2)
    a = RateDistribution((0.0, 1.0, 2.0), (0.5, 0.0, 0.5))
    b = RateDistribution((0.0, 1.0, 2.0), (0.0, 1.0, 0.0))
    assert dominance_ordering([a, b]) is None


def test_expected_max_enumeration(coin_pair):
    # P(max = 1) = 1/4
    assert expected_max_rate(coin_pair) == pytest.approx(1.75)
    rng = np.random.default_rng(3)
    users = [rayleigh_rate_distribution(s) for s in rng.uniform(-5, 15, 3)]
    grids = np.meshgrid(*[u.values for u in users], indexing="ij")
    probs = np.einsum("i,j,k->ijk", *[u.probs for u in users])
    brute = (np.maximum(np.maximum(grids[0], grids[1]), grids[2]) * probs).sum()
    assert expected_max_rate(users) == pytest.approx(brute, rel=1e-12)


def test_exponential_quantisation_keeps_mean():
    for levels in (4, 32, 64):
        d = exponential_rate_distribution(2.5, levels)
        assert d.mean() == pytest.approx(2.5, rel=1e-12)
        assert np.all(np.diff(d.values) > 0)
    weak = exponential_rate_distribution(0.01, 16)
    strong = exponential_rate_distribution(1.0, 16)
    assert np.allclose(weak.values * 100, strong.values)


def test_calibration():
    snr = calibrate_mean_snr_db(1.0)
    assert rayleigh_rate_distribution(snr).mean() == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        calibrate_mean_snr_db(10.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(2, 4))
def test_random_ordered_users_are_ordered(seed, k, levels):
    users = random_ordered_users(np.random.default_rng(seed), k, levels)
    order = dominance_ordering(users)
    assert order is not None
    for i, j in zip(order, order[1:]):
        assert stochastically_dominates(users[i], users[j])
