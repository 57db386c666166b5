"""Compiled slot loops shared by the step-wise API and the batch runners.

All randomness enters as pre-drawn uniforms, so a batch run and a slot-by-slot
run fed from the same generators are bit-identical.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def weight(rate, xbar, alpha):
    if rate <= 0.0:
        return 0.0
    if alpha == 0.0:
        return rate
    if xbar <= 0.0:
        return np.inf
    return rate * xbar ** (-alpha)


@njit(cache=True)
def lookup_rates(values, cdf, u, out):
    for k in range(values.shape[0]):
        idx = np.searchsorted(cdf[k], u[k], side="right")
        if idx >= values.shape[1]:
            idx = values.shape[1] - 1
        out[k] = values[k, idx]


@njit(cache=True)
def choose(rates, xbar, alpha, members, n_members, u):
    """Index of the max-weight member, ties uniform via ``u``; -1 if all weights are 0."""
    best = 0.0
    n_ties = 0
    for j in range(n_members):
        w = weight(rates[members[j]], xbar[members[j]], alpha)
        if w > best:
            best = w
            n_ties = 1
        elif w == best and w > 0.0:
            n_ties += 1
    if n_ties == 0:
        return -1
    pick = int(u * n_ties)
    if pick >= n_ties:
        pick = n_ties - 1
    seen = 0
    for j in range(n_members):
        k = members[j]
        if weight(rates[k], xbar[k], alpha) == best:
            if seen == pick:
                return k
            seen += 1
    return -1


@njit(cache=True)
def average_update(xbar, members, n_members, served, rate, t):
    decay = t / (t + 1.0)
    for j in range(n_members):
        xbar[members[j]] *= decay
    if served >= 0:
        xbar[served] += rate / (t + 1.0)


@njit(cache=True)
def expert_slot(xbar, members, n_members, rates, alpha, t, u):
    k = choose(rates, xbar, alpha, members, n_members, u)
    average_update(xbar, members, n_members, k, rates[k] if k >= 0 else 0.0, t)
    return k


@njit(cache=True)
def select_expert(expert_xbar, order, sizes, bias):
    """Position in ``sizes`` of the best expert; ties go to the smaller set."""
    if np.isinf(bias) and bias > 0:
        return sizes.shape[0] - 1
    best_i = 0
    best = -np.inf
    for i in range(sizes.shape[0]):
        total = 0.0
        for j in range(sizes[i]):
            total += expert_xbar[i, order[j]]
        total += sizes[i] * bias
        if total > best:
            best = total
            best_i = i
    return best_i


@njit(cache=True)
def selective_slot(expert_xbar, xbar_sel, order, sizes, rates, alpha, t, u_row, bias):
    """One slot of the expert bank plus the real scheduler.

    Experts advance first on this slot's rates, then the best one fixes the
    admitted prefix and the real scheduler picks inside it using its own
    averages. Returns (served user or -1, chosen expert position).
    """
    n_exp = sizes.shape[0]
    for i in range(n_exp):
        expert_slot(expert_xbar[i], order, sizes[i], rates, alpha, t, u_row[i])
    e = select_expert(expert_xbar, order, sizes, bias)
    k = choose(rates, xbar_sel, alpha, order, sizes[e], u_row[n_exp])
    # every user's real average decays, admitted or not
    average_update(xbar_sel, order, order.shape[0], k, rates[k] if k >= 0 else 0.0, t)
    return k, e


@njit(cache=True)
def gbs_run(values, cdf, u_rates, u_tie, alpha, members, checkpoint):
    n_slots, n_users = u_rates.shape
    xbar = np.zeros(n_users)
    bits = np.zeros(n_users)
    rates = np.zeros(n_users)
    served_at_checkpoint = 0.0
    all_users = np.arange(n_users)
    for t in range(n_slots):
        lookup_rates(values, cdf, u_rates[t], rates)
        k = choose(rates, xbar, alpha, members, members.shape[0], u_tie[t])
        r = rates[k] if k >= 0 else 0.0
        average_update(xbar, all_users, n_users, k, r, t)
        if k >= 0:
            bits[k] += r
        if t + 1 == checkpoint:
            served_at_checkpoint = bits.sum()
    return xbar, bits, served_at_checkpoint


@njit(cache=True)
def selective_run(values, cdf, u_rates, u_tie, alpha, order, sizes, bias, checkpoint):
    n_slots, n_users = u_rates.shape
    expert_xbar = np.zeros((sizes.shape[0], n_users))
    xbar_sel = np.zeros(n_users)
    bits = np.zeros(n_users)
    rates = np.zeros(n_users)
    trace = np.zeros(n_slots, dtype=np.int32)
    served_at_checkpoint = 0.0
    for t in range(n_slots):
        lookup_rates(values, cdf, u_rates[t], rates)
        k, e = selective_slot(expert_xbar, xbar_sel, order, sizes, rates, alpha, t, u_tie[t], bias)
        trace[t] = sizes[e]
        if k >= 0:
            bits[k] += rates[k]
        if t + 1 == checkpoint:
            served_at_checkpoint = bits.sum()
    return xbar_sel, expert_xbar, bits, trace, served_at_checkpoint
