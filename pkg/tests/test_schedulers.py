import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfair import (ChannelRealization, ExpertState, FairnessSpec, GbsState, RateDistribution,
                     SelectiveGbsState, expert_step, gbs_step, gbs_weight, minimize_pof_brute,
                     rayleigh_rate_distribution, run_gbs, run_selective_gbs, sample_rates,
                     selective_gbs_step, threshold_policy_step)

from conftest import det


def users4():
    return [rayleigh_rate_distribution(s) for s in (12.0, 6.0, 1.0, -4.0)]


def test_weight_examples():
    assert gbs_weight(2.0, 1.0, 1.0) == 2.0
    assert gbs_weight(1.0, 0.0, 1.0) == math.inf
    assert gbs_weight(3.0, 2.0, 2.0) == 0.75
    assert gbs_weight(0.0, 0.0, 1.0) == 0.0
    assert gbs_weight(3.0, 0.0, 0.0) == 3.0


def test_average_update_formula():
    state = GbsState(np.array([1.0, 0.0]), t=1)
    real = ChannelRealization(np.array([1.0, 2.0]))
    new, dec = gbs_step(state, real, 1.0, np.random.default_rng(0))
    assert dec.served_user == 1 and dec.rate == 2.0
    assert new.xbar.tolist() == [0.5, 1.0]
    assert new.t == 2


def test_infinite_weights_break_ties_uniformly():
    real = ChannelRealization(np.array([1.0, 2.0]))
    rng = np.random.default_rng(1)
    picks = [gbs_step(GbsState.start(2), real, 1.0, rng)[1].served_user for _ in range(4000)]
    assert abs(np.mean(picks) - 0.5) < 0.03


def test_single_user_average_is_its_mean_rate(rng):
    d = RateDistribution((1.0, 3.0), (0.25, 0.75))
    run = run_gbs([d], 1.0, 50_000, rng, rng)
    u = np.random.default_rng(12345).random((50_000, 1))
    rates = np.where(u[:, 0] < 0.25, 1.0, 3.0)
    assert run.xbar[0] == pytest.approx(rates.mean(), rel=1e-12)
    assert run.total == pytest.approx(rates.mean(), rel=1e-12)


def test_step_and_batch_gbs_agree():
    users = users4()
    slots = 3000
    fa, ta = np.random.default_rng(5), np.random.default_rng(6)
    run = run_gbs(users, 1.0, slots, fa, ta)
    fb, tb = np.random.default_rng(5), np.random.default_rng(6)
    state = GbsState.start(4)
    bits = np.zeros(4)
    for t in range(slots):
        state, dec = gbs_step(state, sample_rates(users, fb, t), 1.0, tb)
        if dec.served_user is not None:
            bits[dec.served_user] += dec.rate
    assert np.array_equal(state.xbar, run.xbar)
    assert np.array_equal(bits, run.bits)


def test_step_and_batch_selective_agree():
    users = users4()
    slots, bias = 2000, 0.05
    run = run_selective_gbs(users, 1.0, slots, (0, 1, 2, 3), 1, np.random.default_rng(8),
                            np.random.default_rng(9), queue_bias=bias)
    fb, tb = np.random.default_rng(8), np.random.default_rng(9)
    state = SelectiveGbsState.start((0, 1, 2, 3), 1)
    trace = []
    for t in range(slots):
        state, dec = selective_gbs_step(state, sample_rates(users, fb, t), 1.0, tb, bias)
        trace.append(len(dec.active_set))
    assert np.array_equal(state.xbar_sel, run.xbar)
    assert np.array_equal(state.expert_xbar, run.expert_xbar)
    assert trace == run.trace.tolist()


def test_expert_step_matches_restricted_gbs():
    users = users4()
    members = (1, 3)
    fa, ta = np.random.default_rng(2), np.random.default_rng(3)
    run = run_gbs(users, 2.0, 1500, fa, ta, active=members)
    fb, tb = np.random.default_rng(2), np.random.default_rng(3)
    ex = ExpertState.start(members, 4)
    for t in range(1500):
        ex, _ = expert_step(ex, sample_rates(users, fb, t), 2.0, tb)
    assert np.array_equal(ex.xbar, run.xbar)
    assert ex.total == pytest.approx(run.xbar[[1, 3]].sum())


def test_experts_are_decoupled_from_the_real_scheduler():
    # each expert is plain GBS on its prefix, whatever the bias or the real choices
    users = users4()
    slots, order = 4000, np.array([0, 1, 2, 3])
    u_rates = np.random.default_rng(4).random((slots, 4))
    u_tie = np.random.default_rng(5).random((slots, 5))
    sel = run_selective_gbs(users, 1.0, slots, order, 1, u_rates=u_rates, u_tie=u_tie,
                            queue_bias=0.3)
    for i, s in enumerate(sel.sizes):
        ref = run_gbs(users, 1.0, slots, active=order[:s], u_rates=u_rates, u_tie=u_tie[:, i])
        assert np.array_equal(sel.expert_xbar[i], ref.xbar)


def test_full_size_only_reduces_to_gbs():
    users = users4()
    slots = 3000
    u_rates = np.random.default_rng(1).random((slots, 4))
    u_tie = np.random.default_rng(2).random((slots, 2))
    sel = run_selective_gbs(users, 1.0, slots, (0, 1, 2, 3), s_min=4, u_rates=u_rates,
                            u_tie=u_tie)
    ref = run_gbs(users, 1.0, slots, u_rates=u_rates, u_tie=u_tie[:, 1])
    assert len(sel.sizes) == 1
    assert np.array_equal(sel.xbar, ref.xbar)


def test_one_user_per_slot_and_conservation():
    users = users4()
    slots = 5000
    u_rates = np.random.default_rng(7).random((slots, 4))
    run = run_gbs(users, 1.0, slots, u_rates=u_rates, u_tie=np.random.default_rng(8).random(slots))
    # the served rate per slot is one of the rates drawn; bits add up to the xbar identity
    assert run.bits.sum() / slots == pytest.approx(run.xbar.sum(), rel=1e-9)
    assert np.allclose(run.bits / slots, run.xbar, rtol=1e-9)
    state = GbsState.start(4)
    rng = np.random.default_rng(0)
    served = 0.0
    drawn = 0.0
    for t in range(500):
        real = sample_rates(users, rng, t)
        state, dec = gbs_step(state, real, 1.0, rng)
        assert dec.served_user is None or dec.rate == real.rates[dec.served_user]
        served += dec.rate
        drawn += real.rates.max()
    assert served <= drawn
    assert state.xbar.sum() * 500 == pytest.approx(served, rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.5, 1.0, 2.0]))
def test_rate_scaling_keeps_decisions(seed, alpha):
    users = [rayleigh_rate_distribution(s) for s in (9.0, 2.0, -3.0)]
    scaled = [RateDistribution(tuple(2.0 * u.values), u.pmf) for u in users]
    u_rates = np.random.default_rng(seed).random((2000, 3))
    u_tie = np.random.default_rng(seed + 1).random(2000)
    a = run_gbs(users, alpha, 2000, u_rates=u_rates, u_tie=u_tie)
    b = run_gbs(scaled, alpha, 2000, u_rates=u_rates, u_tie=u_tie)
    assert np.array_equal(2.0 * a.bits, b.bits)


def test_threshold_policy():
    snrs = [-5.0, 0.0, 5.0]
    users = [rayleigh_rate_distribution(s) for s in snrs]
    rng = np.random.default_rng(3)
    s1, s2 = GbsState.start(3), GbsState.start(3)
    r1, r2 = np.random.default_rng(4), np.random.default_rng(4)
    s3 = GbsState.start(3)
    served = set()
    for t in range(2000):
        real = sample_rates(users, rng, t)
        s1, d1 = threshold_policy_step(s1, real, 1.0, -math.inf, snrs, r1)
        s2, d2 = gbs_step(s2, real, 1.0, r2)
        assert d1.served_user == d2.served_user
        s3, d3 = threshold_policy_step(s3, real, 1.0, -3.0, snrs, np.random.default_rng(t))
        served.add(d3.served_user)
        _, d4 = threshold_policy_step(s3, real, 1.0, 10.0, snrs, rng)
        assert d4.served_user is None and d4.rate == 0.0
    assert served <= {1, 2, None}


def test_selective_picks_the_strong_user():
    users = [det(2.0), det(0.01)]
    run = run_selective_gbs(users, 1.0, 20_000, (0, 1), 1, np.random.default_rng(0),
                            np.random.default_rng(1))
    best = minimize_pof_brute(users, FairnessSpec(1.0))
    assert best.set.members == (0,)
    assert run.limiting_set() == (0,)
    assert run.total == pytest.approx(2.0, rel=1e-3)


def test_infinite_bias_admits_everyone():
    users = [det(2.0), det(0.01)]
    run = run_selective_gbs(users, 1.0, 500, (0, 1), 1, np.random.default_rng(0),
                            np.random.default_rng(1), queue_bias=math.inf)
    assert set(run.trace.tolist()) == {2}
    big = run_selective_gbs(users, 1.0, 500, (0, 1), 1, np.random.default_rng(0),
                            np.random.default_rng(1), queue_bias=10.0)
    assert big.trace[-1] == 2
