import numpy as np
import pytest
from hypothesis import given, strategies as st

from selfair import (FairnessSpec, OsfState, SlaSpec, VirtualQueueState, dpp_select,
                     minimize_pof_brute, osf_realization, queue_arrival, queue_update,
                     rayleigh_rate_distribution, run_selective_gbs)
from selfair.oracle import subset_solutions
from selfair.sla import TableBenchmark, offline_optimum, run_dpp

from conftest import det


def test_spec_validation():
    with pytest.raises(ValueError):
        SlaSpec(1.0, 10.0)
    with pytest.raises(ValueError):
        SlaSpec(0.05, 0.0)


def test_arrival_extremes(rng):
    assert all(queue_arrival(7, 0.0, rng) == 7 for _ in range(100))
    assert all(queue_arrival(7, 1.0, rng) == 0 for _ in range(100))


def test_arrival_mean(rng):
    draws = [queue_arrival(10, 0.05, rng) for _ in range(100_000)]
    assert np.mean(draws) == pytest.approx(9.5, abs=0.05)


def test_arrival_consumes_one_uniform():
    a, b = np.random.default_rng(0), np.random.default_rng(0)
    for eps in (0.0, 0.5, 1.0):
        queue_arrival(3, eps, a)
    b.random(3)
    assert a.random() == b.random()


@pytest.mark.parametrize("q,a,d,out", [(0, 0, 5, 0), (3, 10, 4, 9), (2, 1, 7, 0)])
def test_queue_update(q, a, d, out):
    assert queue_update(VirtualQueueState(q, 0), a, d).q == out


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), max_size=50))
def test_queue_stays_nonnegative_and_bounds_backlog(steps):
    s = VirtualQueueState.start(record=True)
    for a, d in steps:
        s = queue_update(s, a, d)
        assert s.q >= 0
    # Q(N) >= sum A - sum D
    assert s.q >= sum(a for a, _ in steps) - sum(d for _, d in steps)
    assert len(s.history) == s.n == len(steps)


def test_queue_rejects_negative():
    with pytest.raises(ValueError):
        queue_update(VirtualQueueState(), -1, 0)


def test_dpp_arithmetic():
    table = {(): 0.0, (0,): 2.0, (0, 1): 1.5}
    assert dpp_select(table, q=0.6, v=1.0).admitted == (0, 1)
    assert dpp_select(table, q=0.0, v=1.0).admitted == (0,)
    assert dpp_select(table, q=1e6, v=1.0).admitted == (0, 1)
    assert dpp_select(table, active=(1,), q=5.0).admitted == ()


def test_dpp_without_queue_is_throughput_max():
    users = [rayleigh_rate_distribution(s) for s in (10.0, 2.0, -6.0)]
    sols = subset_solutions(users, FairnessSpec(1.0), s_min=0)
    table = {us.members: sol.total for us, sol in sols.items()}
    best = minimize_pof_brute(users, FairnessSpec(1.0), s_min=0)
    assert dpp_select(table, q=0.0).admitted == best.set.members


def test_osf_single_user():
    st_ = OsfState.start(SlaSpec(0.05, 10.0))
    st_, run, d = osf_realization(st_, [det(1.5)], 1.0, (0,), 200, np.random.default_rng(0),
                                  np.random.default_rng(1), rng_fading=np.random.default_rng(2))
    assert d == 1
    assert run.bits[0] == pytest.approx(300.0)


def test_osf_without_bias_is_selective_gbs():
    users = [rayleigh_rate_distribution(s) for s in (10.0, 0.0, -8.0)]
    u_rates = np.random.default_rng(0).random((1000, 3))
    u_tie = np.random.default_rng(1).random((1000, 4))
    st_ = OsfState.start(SlaSpec(0.05, 1e300))
    _, run, d = osf_realization(st_, users, 1.0, (0, 1, 2), 1000, None,
                                np.random.default_rng(2), u_rates=u_rates, u_tie=u_tie)
    ref = run_selective_gbs(users, 1.0, 1000, (0, 1, 2), 1, u_rates=u_rates, u_tie=u_tie)
    assert np.array_equal(run.bits, ref.bits)
    assert d == ref.trace[-1]


def test_osf_empty_realization_advances_queue():
    st_ = OsfState.start(SlaSpec(0.05, 10.0), record=True)
    st_, run, d = osf_realization(st_, [], 1.0, (), 100, None, np.random.default_rng(0))
    assert run is None and d == 0
    assert st_.queue.n == 1 and st_.queue.q == 0.0


# -- known-table benchmark ---------------------------------------------------------

def toy_bench():
    return TableBenchmark([[0.0, 2.0, 1.5], [0.0, 1.0]], np.array([0.5, 0.5]))


def test_offline_optimum_by_hand():
    # type A admits both users a fraction f >= 0.85 of the time; value 1.5 - f/4
    assert offline_optimum(toy_bench(), 0.05) == pytest.approx(1.2875, abs=1e-9)
    assert offline_optimum(toy_bench(), 0.0) == pytest.approx(1.25, abs=1e-9)
    assert offline_optimum(toy_bench(), 0.5) == pytest.approx(1.5, abs=1e-9)


def test_dpp_approaches_optimum_on_toy_bench():
    bench = toy_bench()
    vals = []
    for v in (1.0, 10.0, 100.0):
        r = run_dpp(bench, SlaSpec(0.05, v), 100_000, np.random.default_rng(0),
                    np.random.default_rng(1))
        vals.append(r.throughput)
        assert r.admitted_fraction >= 0.95 - 0.01
    assert vals[-1] == pytest.approx(1.2875, rel=0.01)


def test_dpp_with_zero_epsilon_admits_everyone():
    r = run_dpp(toy_bench(), SlaSpec(0.0, 10.0), 50_000, np.random.default_rng(0),
                np.random.default_rng(1))
    assert r.admitted_fraction > 0.99
