"""Offline solvers over the time-sharing polytope.

A scheduling policy that serves user k in a fraction ``phi[r, k]`` of the slots
with joint channel state r achieves throughputs
``x_k = sum_r phi[r, k] p_r r_k``; the set of such x is a polytope. This module
maximises alpha-fair utilities over that polytope (optionally with some users
forced to zero throughput), evaluates the price of fairness, and searches for
the user subset whose fair point carries the most total throughput.

Users are 0-indexed throughout.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .channel import expected_max_rate

STATE_CAP = 10**6
PRUNE_BELOW = 1e-15
GRAD_FLOOR = 1e-12


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class FairnessSpec:
    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")

    def utility(self, x):
        x = np.asarray(x, float)
        a = self.alpha
        with np.errstate(divide="ignore"):
            if a == 1:
                return np.log(x)
            if a > 1:
                return np.where(x > 0, x ** (1 - a) / (1 - a), -np.inf)
            return x ** (1 - a) / (1 - a)

    def objective(self, x):
        return float(np.sum(self.utility(x)))


@dataclass(frozen=True, order=True)
class UserSet:
    members: tuple
    universe_size: int

    def __post_init__(self):
        members = tuple(sorted(int(k) for k in self.members))
        if len(set(members)) != len(members):
            raise ValueError("duplicate user index")
        if members and (members[0] < 0 or members[-1] >= self.universe_size):
            raise ValueError("user index out of range")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, n):
        return cls(tuple(range(n)), n)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def complement(self):
        return tuple(k for k in range(self.universe_size) if k not in self.members)

    def key(self):
        """Preference order among equally good sets: smaller first, then lexicographic."""
        return (len(self.members), self.members)


@dataclass
class JointStates:
    """Enumerated joint channel states with their probabilities."""

    index: np.ndarray      # (n, K) alphabet positions
    rates: np.ndarray      # (n, K) rate values
    probs: np.ndarray      # (n,)


def joint_states(users, cap=STATE_CAP, prune=PRUNE_BELOW):
    sizes = [len(d.alphabet) for d in users]
    n = math.prod(sizes)
    if n > cap:
        raise StateSpaceTooLarge(f"{n} joint states exceed the cap of {cap}")
    index = np.indices(sizes).reshape(len(users), -1).T
    probs = np.ones(len(index))
    rates = np.empty(index.shape)
    for k, d in enumerate(users):
        probs *= d.probs[index[:, k]]
        rates[:, k] = d.values[index[:, k]]
    keep = probs >= prune
    return JointStates(index[keep], rates[keep], probs[keep])


@dataclass
class TimeSharingPolicy:
    """Per-state scheduling fractions; rows of ``phi`` sum to one."""

    states: np.ndarray = field(repr=False)   # (n, K) alphabet positions
    phi: np.ndarray = field(repr=False)      # (n, K)

    def __post_init__(self):
        if self.phi.shape != self.states.shape:
            raise ValueError("phi must have one row per state and one column per user")
        if np.any(self.phi < -1e-12) or np.any(self.phi > 1 + 1e-12):
            raise ValueError("fractions must lie in [0, 1]")
        if not np.allclose(self.phi.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("fractions must sum to one in every state")


@dataclass
class SelectiveFairSolution:
    set: UserSet
    point: np.ndarray
    total: float
    policy: TimeSharingPolicy = field(default=None, repr=False)
    objective: float = float("nan")
    gap: float = 0.0
    iterations: int = 0


def throughput_of(policy, users):
    """Throughput vector ``x_k = sum_r phi[r,k] p_r r_k`` of a policy."""
    probs = np.ones(len(policy.states))
    rates = np.empty(policy.states.shape)
    for k, d in enumerate(users):
        probs *= d.probs[policy.states[:, k]]
        rates[:, k] = d.values[policy.states[:, k]]
    covered = probs.sum()
    if covered < 1 - 1e-9:
        raise ValueError(f"policy misses states carrying probability {1 - covered:.3g}")
    return (policy.phi * rates * probs[:, None]).sum(axis=0)


# -- conditional gradient ----------------------------------------------------

def _gradient(u, alpha):
    with np.errstate(over="ignore"):
        return np.maximum(u, GRAD_FLOOR) ** -alpha


def _line_search(u, d, alpha, gamma_max):
    """argmax over [0, gamma_max] of the concave f(u + gamma d)."""

    def slope(g):
        return _gradient(u + g * d, alpha) @ d

    if slope(gamma_max) >= 0:
        return gamma_max
    if slope(0.0) <= 0:
        return 0.0
    lo, hi = 0.0, gamma_max
    g = 0.5 * gamma_max
    for _ in range(100):
        s = slope(g)
        if s > 0:
            lo = g
        else:
            hi = g
        # Newton step on the slope, kept inside the bracket
        v = np.maximum(u + g * d, GRAD_FLOOR)
        curv = -alpha * (v ** (-alpha - 1) @ (d * d))
        nxt = g - s / curv if curv < 0 else 0.5 * (lo + hi)
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - g) <= 1e-15 * max(1.0, gamma_max) or hi - lo <= 1e-15:
            return nxt
        g = nxt
    return g


class _Atoms:
    """Active vertices of the away-step method, keyed by their state assignment."""

    def __init__(self):
        self.assign = []
        self.x = []
        self.weight = []
        self._index = {}

    def add(self, assign, x, w):
        key = assign.tobytes()
        i = self._index.get(key)
        if i is None:
            self._index[key] = len(self.assign)
            self.assign.append(assign)
            self.x.append(x)
            self.weight.append(w)
            return len(self.assign) - 1
        self.weight[i] += w
        return i

    def prune(self):
        keep = [i for i, w in enumerate(self.weight) if w > 1e-14]
        self.assign = [self.assign[i] for i in keep]
        self.x = [self.x[i] for i in keep]
        total = sum(self.weight[i] for i in keep)
        self.weight = [self.weight[i] / total for i in keep]
        self._index = {a.tobytes(): i for i, a in enumerate(self.assign)}

    def point(self):
        return np.asarray(self.weight) @ np.asarray(self.x)


def _vertex(weights, rates, probs):
    """Serve the max ``weight * rate`` user in every state (lowest index on ties)."""
    assign = np.argmax(rates * weights[None, :], axis=1)
    x = np.bincount(assign, weights=probs * rates[np.arange(len(assign)), assign],
                    minlength=rates.shape[1])
    return assign, x


def _fw_solve(rates, probs, alpha, tol, max_iter):
    """Away-step conditional gradient over the time-sharing polytope."""
    m = rates.shape[1]
    atoms = _Atoms()
    if alpha == 0:
        assign, x = _vertex(np.ones(m), rates, probs)
        atoms.add(assign, x, 1.0)
        return atoms, 0.0, 0
    n = len(probs)
    means = probs @ rates
    for k in range(m):
        x = np.zeros(m)
        x[k] = means[k]
        atoms.add(np.full(n, k), x, 1.0 / m)
    u = atoms.point()
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = _gradient(u, alpha)
        s_assign, s_x = _vertex(grad, rates, probs)
        gap = grad @ (s_x - u)
        if gap <= tol * max(1.0, grad @ u):
            break
        xs = np.asarray(atoms.x)
        a = int(np.argmin(xs @ grad))
        away_gap = grad @ (u - xs[a])
        if gap >= away_gap:
            d = s_x - u
            gamma = _line_search(u, d, alpha, 1.0)
            atoms.weight = [w * (1 - gamma) for w in atoms.weight]
            atoms.add(s_assign, s_x, gamma)
        else:
            lam = atoms.weight[a]
            gmax = lam / (1 - lam) if lam < 1 else math.inf
            d = u - xs[a]
            gamma = min(_line_search(u, d, alpha, min(gmax, 1e12)), gmax)
            atoms.weight = [w * (1 + gamma) for w in atoms.weight]
            atoms.weight[a] -= gamma
        atoms.prune()
        u = atoms.point()
    return atoms, float(gap), it


# -- smoothed dual Newton ---------------------------------------------------------
#
# For alpha > 0 the fair point is x = w ** (-1/alpha) where w > 0 minimises
#     h(w) + sum_k G(w_k),   h(w) = E[max_k w_k R_k],   G(w) = max_x g(x) - w x.
# h is replaced by a per-state log-sum-exp with relative temperature ``rel``
# which is driven to zero; the softmax weights are a feasible policy whose
# throughput equals grad h at every iterate.


def _conjugate(w, alpha):
    if alpha == 1:
        return float(np.sum(-np.log(w) - 1.0))
    return float(np.sum(w ** (1 - 1 / alpha)) * alpha / (1 - alpha))


def _smoothed(w, rates, probs, taus, hessian=True):
    z = rates * w / taus[:, None]
    zmax = z.max(axis=1, keepdims=True)
    e = np.exp(z - zmax)
    se = e.sum(axis=1, keepdims=True)
    sig = e / se
    h = probs @ (taus * (zmax[:, 0] + np.log(se[:, 0])))
    if not hessian:
        return h, sig
    pr = probs[:, None] * sig * rates
    q = pr / taus[:, None]
    hess = np.diag((q * rates).sum(axis=0)) - q.T @ (sig * rates)
    return h, sig, pr.sum(axis=0), hess


def _dual_newton(rates, probs, alpha, rel_tol, w0=None, max_newton=300):
    """Continuation on the smoothing temperature; returns (w, softmax policy, steps)."""
    m = rates.shape[1]
    w = (probs @ rates / m) ** -alpha if w0 is None else np.asarray(w0, float).copy()
    # all-zero states carry no throughput and no smoothing scale
    live = rates.max(axis=1) > 0
    full_rates, rates, probs = rates, rates[live], probs[live]
    rel, rel_end = 1.0, rel_tol / (4 * math.log(m))
    steps = 0
    while True:
        taus = rel * (rates * w).max(axis=1)
        for _ in range(max_newton):
            steps += 1
            h, sig, grad_h, hess = _smoothed(w, rates, probs, taus)
            g = grad_h - w ** (-1 / alpha)
            hess += np.diag(w ** (-1 / alpha - 1) / alpha)
            sc = 1.0 / np.sqrt(np.diag(hess))
            hn = hess * sc[:, None] * sc[None, :]
            try:
                d = -sc * np.linalg.solve(hn, g * sc)
            except np.linalg.LinAlgError:
                d = -sc * np.linalg.lstsq(hn, g * sc, rcond=None)[0]
            dec = -(g @ d)
            if not dec > 1e-3 * rel * h:
                break
            t = 1.0
            neg = d < 0
            if neg.any():
                with np.errstate(over="ignore"):
                    t = min(1.0, 0.99 * float(np.min(-w[neg] / d[neg])))
            f0 = h + _conjugate(w, alpha)
            while t > 1e-20:
                trial = w + t * d
                if _smoothed(trial, rates, probs, taus, False)[0] + _conjugate(trial, alpha) \
                        <= f0 - 0.25 * t * dec:
                    break
                t *= 0.5
            w = w + t * d
        if rel <= rel_end:
            break
        rel = max(0.1 * rel, rel_end)
    sig = np.zeros(full_rates.shape)
    sig[~live, 0] = 1.0
    sig[live] = _smoothed(w, rates, probs, rel * (rates * w).max(axis=1), False)[1]
    return w, sig, steps


def _tie_groups(rates, w, active):
    """Group users linked by ties; returns (group id, weight ratio within group) or None."""
    m = rates.shape[1]
    adj = [[] for _ in range(m)]
    for s in np.flatnonzero(active.sum(axis=1) > 1):
        ks = np.flatnonzero(active[s])
        j = ks[0]
        for k in ks[1:]:
            adj[j].append((k, rates[s, j] / rates[s, k]))
            adj[k].append((j, rates[s, k] / rates[s, j]))
    group = np.full(m, -1)
    ratio = np.ones(m)
    n_groups = 0
    for root in range(m):
        if group[root] >= 0:
            continue
        group[root] = n_groups
        stack = [root]
        while stack:
            a = stack.pop()
            for b, r in adj[a]:
                if group[b] < 0:
                    group[b] = n_groups
                    ratio[b] = ratio[a] * r
                    stack.append(b)
                elif abs(ratio[b] - ratio[a] * r) > 1e-9 * ratio[b]:
                    return None
        n_groups += 1
    return group, ratio, n_groups


def _split_ties(rates, probs, active, phi, target):
    """Fill tied states of ``phi`` so the throughput hits ``target`` (LP on tie patterns)."""
    n, m = rates.shape
    tied = np.flatnonzero(active.sum(axis=1) > 1)
    if len(tied) == 0:
        return phi
    masked = np.where(active[tied], rates[tied], -1.0)
    pats, inv = np.unique(masked, axis=0, return_inverse=True)
    inv = inv.ravel()
    mass = np.bincount(inv, weights=probs[tied])
    idx = np.argwhere(pats >= 0)
    ns, nv = len(pats), len(idx)
    need = target - probs @ (phi * rates)
    scale = 1.0 / target
    # pattern rows sum to one; user rows hit the target up to penalised slack
    rows = np.concatenate((idx[:, 0], ns + idx[:, 1], ns + np.arange(m), ns + np.arange(m)))
    cols = np.concatenate((np.arange(nv), np.arange(nv), nv + np.arange(m), nv + m + np.arange(m)))
    vals = np.concatenate((np.ones(nv), mass[idx[:, 0]] * pats[idx[:, 0], idx[:, 1]] * scale[idx[:, 1]],
                           np.ones(m), -np.ones(m)))
    a_eq = sparse.csr_matrix((vals, (rows, cols)), shape=(ns + m, nv + 2 * m))
    res = linprog(np.concatenate((np.zeros(nv), np.ones(2 * m))), A_eq=a_eq,
                  b_eq=np.concatenate((np.ones(ns), need * scale)), bounds=(0, None),
                  method="highs", options=dict(primal_feasibility_tolerance=1e-10, time_limit=30.0))
    if res.x is None or res.fun > 1e-8:
        return None
    split = np.zeros((ns, m))
    split[idx[:, 0], idx[:, 1]] = np.maximum(res.x[:nv], 0.0)
    split /= split.sum(axis=1, keepdims=True)
    phi[tied] = split[inv]
    return phi


def _polish(rates, probs, alpha, w, delta):
    """Exact fair point from the tie structure of an approximate dual ``w``.

    Users whose weighted rates tie (within ``delta``) in some state must have
    equal weighted rates at the optimum, which fixes the ratios of their duals.
    Each linked group then has one free scale, and in closed form
    ``c = (sum ratio**(1-1/alpha) / M) ** alpha`` where M is the group's
    ratio-weighted expected rate over the states it wins. A small LP splits
    tied states. Returns a policy or None when the guessed structure is wrong.
    """
    n, m = rates.shape
    v = rates * w
    top = v.max(axis=1)
    live = top > 0
    active = (v >= top[:, None] * (1 - delta)) & live[:, None]
    groups = _tie_groups(rates, w, active)
    if groups is None:
        return None
    group, ratio, n_groups = groups
    owner = group[np.argmax(active, axis=1)]
    if np.any(active & (group[None, :] != owner[:, None])):
        return None
    w_new = np.empty(m)
    for gi in range(n_groups):
        ks = group == gi
        wins = (owner == gi) & live
        mass = probs[wins] @ (rates[wins][:, ks] * ratio[ks]).max(axis=1)
        if not mass > 0:
            return None
        tot = ks.sum() if alpha == 1 else (ratio[ks] ** (1 - 1 / alpha)).sum()
        w_new[ks] = (tot / mass) ** alpha * ratio[ks]
    v = rates * w_new
    top = v.max(axis=1)
    active = (v >= top[:, None] * (1 - 1e-12)) & live[:, None]
    phi = np.zeros((n, m))
    single = active.sum(axis=1) == 1
    phi[single, np.argmax(active[single], axis=1)] = 1.0
    phi[~live, 0] = 1.0
    return _split_ties(rates, probs, active, phi, w_new ** (-1 / alpha))


def _fw_gap(phi, rates, probs, alpha):
    """(throughput, Frank-Wolfe gap, gap scale) of a policy on the live users."""
    x = probs @ (phi * rates)
    if np.any(x <= 0):
        return x, math.inf, 1.0
    grad = x ** -alpha
    _, s_x = _vertex(grad, rates, probs)
    return x, float(grad @ (s_x - x)), max(1.0, float(grad @ x))


def _dual_solve(rates, probs, alpha, tol, w0=None):
    best = (math.inf, None, 0)
    rel_tol = min(tol, 1e-7)
    for attempt in range(2):
        w, sig, steps = _dual_newton(rates, probs, alpha, rel_tol, w0)
        x, gap, scale = _fw_gap(sig, rates, probs, alpha)
        if gap / scale < best[0]:
            best = (gap / scale, sig, steps)
        for delta in (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3):
            phi = _polish(rates, probs, alpha, w, delta)
            if phi is None:
                continue
            x, gap, scale = _fw_gap(phi, rates, probs, alpha)
            if gap / scale < best[0]:
                best = (gap / scale, phi, steps)
            if best[0] <= 1e-3 * tol:
                return best
        if best[0] <= tol:
            return best
        rel_tol *= 1e-2
    return best


def solve_num(users, spec, restrict=None, tol=1e-6, method="dual", max_iter=100_000,
              states=None, init=None):
    """Selective alpha-fair point: maximise the utility of ``restrict`` users,
    with everyone else held at zero throughput.

    Parameters
    ----------
    users : list of RateDistribution
    spec : FairnessSpec
    restrict : UserSet or iterable of indices, optional
        Selected users; all by default.
    tol : float
        Bound on the Frank-Wolfe gap ``grad . (s - x)`` relative to
        ``max(1, grad . x)``; this also bounds the relative suboptimality.
    method : {"dual", "frank-wolfe"}
        ``"dual"`` (default) runs Newton on a smoothed dual followed by an
        exact reconstruction from the tie pattern; ``"frank-wolfe"`` runs the
        away-step conditional gradient method.
    init : array, optional
        Starting dual weights (``"dual"``) for restart checks.

    For ``alpha == 0`` the max-sum point is not unique; the returned policy
    serves a per-state rate maximiser, lowest index on ties.
    """
    n_users = len(users)
    if restrict is None:
        restrict = UserSet.full(n_users)
    elif not isinstance(restrict, UserSet):
        restrict = UserSet(tuple(restrict), n_users)
    if len(restrict) == 0:
        raise ValueError("restrict must contain at least one user")
    if states is None:
        states = joint_states(users)
    members = np.asarray(restrict.members)
    # users that never get a positive rate cannot receive throughput
    live = members[(states.probs @ states.rates[:, members]) > 0]
    n = len(states.probs)
    phi = np.zeros(states.rates.shape)
    gap, it = 0.0, 0
    if len(live) == 0:
        phi[:, members[0]] = 1.0
    else:
        rates = states.rates[:, live]
        if spec.alpha == 0 or len(live) == 1:
            assign, _ = _vertex(np.ones(len(live)), rates, states.probs)
            sub = np.zeros(rates.shape)
            sub[np.arange(n), assign] = 1.0
        elif method == "dual":
            gap, sub, it = _dual_solve(rates, states.probs, spec.alpha, tol, init)
        elif method == "frank-wolfe":
            atoms, gap, it = _fw_solve(rates, states.probs, spec.alpha, tol, max_iter)
            sub = np.zeros(rates.shape)
            for assign, wt in zip(atoms.assign, atoms.weight):
                sub[np.arange(n), assign] += wt
        else:
            raise ValueError(f"unknown method {method!r}")
        sub /= sub.sum(axis=1, keepdims=True)
        phi[:, live] = sub
        if spec.alpha > 0 and len(live) > 1:
            _, g, scale = _fw_gap(sub, rates, states.probs, spec.alpha)
            gap = g / scale
    point = (phi * states.rates * states.probs[:, None]).sum(axis=0)
    policy = TimeSharingPolicy(states.index, phi)
    return SelectiveFairSolution(restrict, point, float(point.sum()), policy,
                                 spec.objective(point[members]), gap, it)


# -- brute-force oracle --------------------------------------------------------

def _frontier_lp(states, members, lower, last):
    """Maximise x_last subject to x_k >= lower_k for the other members."""
    n, m = len(states.probs), len(members)
    coef = states.rates[:, members] * states.probs[:, None]     # (n, m)
    c = np.zeros(n * m)
    c[last::m] = -coef[:, last]
    a_eq = np.kron(np.eye(n), np.ones(m))
    others = [j for j in range(m) if j != last]
    a_ub = np.zeros((len(others), n * m))
    for row, j in enumerate(others):
        a_ub[row, j::m] = -coef[:, j]
    res = linprog(c, A_ub=a_ub if others else None, b_ub=-np.asarray(lower) if others else None,
                  A_eq=a_eq, b_eq=np.ones(n), bounds=(0, 1), method="highs")
    if res.status != 0:
        return None
    phi = res.x.reshape(n, m)
    return phi, (phi * coef).sum(axis=0)


def brute_force_num(users, spec, restrict=None, grid_step=1e-3):
    """Grid-search oracle for :func:`solve_num` on tiny instances.

    Scans the throughputs of all but one selected user on a grid, refined
    around the incumbent down to ``grid_step``; for each grid point an LP
    gives the largest achievable throughput of the remaining user. Uses no
    code from the conditional-gradient solver.
    """
    n_users = len(users)
    if n_users > 3 or max(len(d.alphabet) for d in users) > 3:
        raise StateSpaceTooLarge("brute force is limited to K <= 3 users and L <= 3 rates")
    if restrict is None:
        restrict = UserSet.full(n_users)
    elif not isinstance(restrict, UserSet):
        restrict = UserSet(tuple(restrict), n_users)
    states = joint_states(users)
    members = list(restrict.members)
    m = len(members)
    means = states.probs @ states.rates[:, members]
    last = m - 1

    best = (-math.inf, None, None)

    def evaluate(lower):
        nonlocal best
        sol = _frontier_lp(states, members, lower, last)
        if sol is None:
            return -math.inf
        phi, x = sol
        val = spec.objective(np.maximum(x, 0.0))
        if val > best[0]:
            best = (val, phi, x)
        return val

    if m == 1:
        evaluate([])
    else:
        lo = np.zeros(m - 1)
        hi = means[:last].copy()
        n_pts = 21
        while True:
            axes = [np.linspace(a, b, n_pts) for a, b in zip(lo, hi)]
            step = max((b - a) / (n_pts - 1) for a, b in zip(lo, hi))
            vals = {}
            for pt in itertools.product(*axes):
                vals[pt] = evaluate(list(pt))
            centre = np.asarray(max(vals, key=vals.get))
            if step <= grid_step:
                break
            lo = np.maximum(centre - 2 * step, 0.0)
            hi = np.minimum(centre + 2 * step, means[:last])
            n_pts = 17
    val, phi_s, x_s = best
    point = np.zeros(n_users)
    full_phi = np.zeros(states.rates.shape)
    if phi_s is not None:
        point[members] = x_s
        full_phi[:, members] = phi_s
        full_phi /= full_phi.sum(axis=1, keepdims=True)
    return SelectiveFairSolution(restrict, point, float(point.sum()),
                                 TimeSharingPolicy(states.index, full_phi), val)


def max_min_throughput(users, restrict=None):
    """Largest t such that every selected user can get at least t (LP)."""
    n_users = len(users)
    members = list(range(n_users)) if restrict is None else list(restrict)
    states = joint_states(users)
    n, m = len(states.probs), len(members)
    coef = states.rates[:, members] * states.probs[:, None]
    c = np.zeros(n * m + 1)
    c[-1] = -1.0
    a_ub = np.zeros((m, n * m + 1))
    for j in range(m):
        a_ub[j, j:n * m:m] = -coef[:, j]
        a_ub[j, -1] = 1.0
    a_eq = np.hstack([np.kron(np.eye(n), np.ones(m)), np.zeros((n, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq, b_eq=np.ones(n),
                  bounds=[(0, 1)] * (n * m) + [(0, None)], method="highs")
    return float(res.x[-1])


# -- price of fairness and subset selection --------------------------------------

def price_of_fairness(users, spec, tol=1e-6):
    """Relative loss of sum throughput at the alpha-fair point versus max-sum."""
    best = expected_max_rate(users)
    if best <= 0:
        raise ValueError("every rate is zero; price of fairness undefined")
    if spec.alpha == 0 or len(users) == 1:
        return 0.0
    fair = solve_num(users, spec, tol=tol).total
    return max(0.0, (best - fair) / best)


def _empty_solution(users, states):
    n = len(users)
    phi = np.zeros(states.rates.shape)
    phi[:, 0] = 1.0
    return SelectiveFairSolution(UserSet((), n), np.zeros(n), 0.0,
                                 TimeSharingPolicy(states.index, phi), -math.inf)


def subset_solutions(users, spec, s_min=1, subsets=None, tol=1e-9):
    """Selective fair solutions for every candidate subset (all with |S| >= s_min)."""
    n = len(users)
    if s_min > n:
        raise ValueError("s_min exceeds the number of users")
    if subsets is None:
        if n > 12:
            raise StateSpaceTooLarge("exhaustive subset search is limited to 12 users")
        subsets = [c for r in range(max(s_min, 0), n + 1)
                   for c in itertools.combinations(range(n), r)]
    states = joint_states(users)
    out = {}
    for members in subsets:
        us = UserSet(tuple(members), n)
        out[us] = (_empty_solution(users, states) if len(us) == 0
                   else solve_num(users, spec, us, tol=tol, states=states))
    return out


def best_subset(solutions, tie_tol=1e-9):
    """Highest total; near-ties resolved toward smaller, then lexicographically first sets."""
    best = None
    for us in sorted(solutions, key=UserSet.key):
        sol = solutions[us]
        if best is None or sol.total > best.total + tie_tol * max(1.0, abs(best.total)):
            best = sol
    return best


def minimize_pof_brute(users, spec, s_min=1, tol=1e-9):
    """Best selective fair point over all subsets of at least ``s_min`` users."""
    return best_subset(subset_solutions(users, spec, s_min, tol=tol))


def minimize_pof_monotone(users, spec, s_min, sigma, tol=1e-9):
    """Same search restricted to the nested prefixes of the dominance order ``sigma``."""
    n = len(users)
    if s_min > n:
        raise ValueError("s_min exceeds the number of users")
    prefixes = [tuple(sigma[:j]) for j in range(max(s_min, 0), n + 1)]
    return best_subset(subset_solutions(users, spec, s_min, prefixes, tol=tol))


def check_throughput_monotonicity(users, spec, s_min=1, tol=1e-7, solutions=None):
    """True iff adding a user to any population never lowers the optimised total."""
    n = len(users)
    if solutions is None:
        solutions = subset_solutions(users, spec, s_min)
    totals = {us.members: sol.total for us, sol in solutions.items()}
    best_within = {}
    for r in range(max(s_min, 0), n + 1):
        for pop in itertools.combinations(range(n), r):
            best_within[pop] = max(t for s, t in totals.items() if set(s) <= set(pop))
    for pop, value in best_within.items():
        for j in set(range(n)) - set(pop):
            bigger = tuple(sorted(pop + (j,)))
            if best_within[bigger] < value - tol:
                return False
    return True
