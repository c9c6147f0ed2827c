"""Independent reference implementations used only by the tests.

Nothing here imports the tree, planning or bound code; each oracle works from
the raw instance arrays with plain loops or exhaustive enumeration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


# information measures ---------------------------------------------------------

def entropy_loop(p):
    return -sum(x * math.log(x) for x in p if x > 0)


def kl_loop(p, q):
    total = 0.0
    for a, b in zip(p, q):
        if a > 0:
            if b == 0:
                return math.inf
            total += a * (math.log(a) - math.log(b))
    return total


def mi_loop(joint):
    joint = np.asarray(joint, float)
    px, py = joint.sum(1), joint.sum(0)
    total = 0.0
    for i in range(joint.shape[0]):
        for j in range(joint.shape[1]):
            if joint[i, j] > 0:
                total += joint[i, j] * math.log(joint[i, j] / (px[i] * py[j]))
    return total


def cmi_double_sum(joint):
    """``I(X;Y|Z)`` as one sum over (x, y, z) of p log(p(x,y,z) p(z) / (p(x,z) p(y,z)))."""
    joint = np.asarray(joint, float)
    pz = joint.sum((0, 1))
    pxz = joint.sum(1)
    pyz = joint.sum(0)
    total = 0.0
    for x, y, z in itertools.product(*map(range, joint.shape)):
        p = joint[x, y, z]
        if p > 0:
            total += p * math.log(p * pz[z] / (pxz[x, z] * pyz[y, z]))
    return total


def w1_two_point_grid(p, q, d01, n_grid=10_000):
    """Brute-force transport cost between two laws on two points at distance ``d01``.

    The coupling is fixed by its (0, 0) entry; search a grid of that entry
    including both end points.
    """
    lo, hi = max(0.0, p[0] - q[1]), min(p[0], q[0])
    x = np.append(np.linspace(lo, hi, n_grid + 1), [lo, hi])
    off = (p[0] - x) + (q[0] - x)  # mass on (0,1) plus mass on (1,0)
    return float((off * d01).min())


def w1_dual_vertices(p, q, dist):
    """Kantorovich-Rubinstein dual: best vertex potential of {f : f_i - f_j <= d_ij, f_0 = 0}."""
    n = len(p)
    diff = np.asarray(p, float) - np.asarray(q, float)
    if n == 1:
        return 0.0
    cons = [(i, j) for i in range(n) for j in range(n) if i != j]
    best = -math.inf
    for chosen in itertools.combinations(cons, n - 1):
        A = np.zeros((n, n))
        b = np.zeros(n)
        A[0, 0] = 1.0
        for row, (i, j) in enumerate(chosen, start=1):
            A[row, i], A[row, j], b[row] = 1.0, -1.0, dist[i][j]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        f = np.linalg.solve(A, b)
        if all(f[i] - f[j] <= dist[i][j] + 1e-9 for i, j in cons):
            best = max(best, float(f @ diff))
    return best


# planning ---------------------------------------------------------------------

def _expected_reward(spec, s, th, a):
    return sum(spec.outcome[s, th, y] * spec.reward[y, a] for y in range(spec.n_outcomes))


def known_theta_brute_force(spec):
    """Best value per parameter over every deterministic rule ``(t, s) -> a``, prior-averaged."""
    S, A, T = spec.n_states, spec.n_actions, spec.horizon
    total = 0.0
    for th in range(spec.n_params):
        best = -math.inf
        for flat in itertools.product(range(A), repeat=T * S):
            rule = np.array(flat).reshape(T, S)
            d = spec.initial_state[th].copy()
            v = 0.0
            for t in range(T):
                v += sum(d[s] * _expected_reward(spec, s, th, rule[t, s]) for s in range(S))
                nd = np.zeros(S)
                for s in range(S):
                    nd += d[s] * spec.trans[s, rule[t, s], th]
                d = nd
            best = max(best, v)
        total += spec.prior[th] * best
    return total


def _reward_prob(spec, s, a, th, r):
    return sum(spec.outcome[s, th, y] for y in range(spec.n_outcomes) if spec.reward[y, a] == r)


def history_policy_brute_force(spec):
    """Exhaustive max over all deterministic history policies, for horizons 1 and 2.

    Second-step information states are ``(s1, a1, r1, s2)`` with ``a1`` the
    first-step choice at ``s1`` and ``r1`` a reward that action can pay; every
    assignment of actions to them (and to first-step states) is evaluated.
    """
    S, A, T = spec.n_states, spec.n_actions, spec.horizon
    assert T <= 2
    best = -math.inf
    for first in itertools.product(range(A), repeat=S):
        v1 = sum(spec.prior[th] * spec.initial_state[th, s] * _expected_reward(spec, s, th, first[s])
                 for th in range(spec.n_params) for s in range(S))
        if T == 1:
            best = max(best, v1)
            continue
        info2 = [(s1, first[s1], r1, s2) for s1 in range(S)
                 for r1 in sorted(set(spec.reward[:, first[s1]].tolist())) for s2 in range(S)]
        # c[i, a]: contribution of playing a at second-step info state i
        c = np.zeros((len(info2), A))
        for i, (s1, a1, r1, s2) in enumerate(info2):
            for th in range(spec.n_params):
                w = (spec.prior[th] * spec.initial_state[th, s1] * _reward_prob(spec, s1, a1, th, r1)
                     * spec.trans[s1, a1, th, s2])
                for a in range(A):
                    c[i, a] += w * _expected_reward(spec, s2, th, a)
        plans = np.array(list(itertools.product(range(A), repeat=len(info2))))
        vals = c[np.arange(len(info2))[None, :], plans].sum(axis=1)
        best = max(best, v1 + float(vals.max()))
    return best


def thompson_value_recursive(spec, psi):
    """Thompson value by explicit recursion over parameters, states, outcomes and sampled parameters.

    The posterior is recomputed from scratch at every node from the recorded
    history (states, actions, rewards), excluding the current state.
    """
    T = spec.horizon

    def posterior(hist):
        w = np.array(spec.prior, float)
        for i, (s, a, r) in enumerate(hist):
            if i == 0:
                w = w * spec.initial_state[:, s]
            else:
                ps, pa, _ = hist[i - 1]
                w = w * spec.trans[ps, pa, :, s]
            w = w * np.array([_reward_prob(spec, s, a, th, r) for th in range(spec.n_params)])
        return w / w.sum()

    def go(t, th, s, hist):
        if t > T:
            return 0.0
        post = posterior(hist)
        total = 0.0
        for th_hat in range(spec.n_params):
            if post[th_hat] == 0:
                continue
            a = psi[t - 1, s, th_hat]
            for y in range(spec.n_outcomes):
                py = spec.outcome[s, th, y]
                if py == 0:
                    continue
                r = float(spec.reward[y, a])
                for s2 in range(spec.n_states):
                    ps = spec.trans[s, a, th, s2]
                    if ps == 0:
                        continue
                    total += post[th_hat] * py * ps * (r + go(t + 1, th, s2, hist + ((s, a, r),)))
        return total

    return sum(spec.prior[th] * spec.initial_state[th, s] * go(1, th, s, ())
               for th in range(spec.n_params) for s in range(spec.n_states)
               if spec.prior[th] * spec.initial_state[th, s] > 0)


def memoryless_brute_force(spec):
    """Best rule ``a_t = g_t(S_t)`` with the parameter unknown (evaluated per parameter, averaged)."""
    S, A, T = spec.n_states, spec.n_actions, spec.horizon
    best = -math.inf
    for flat in itertools.product(range(A), repeat=T * S):
        rule = np.array(flat).reshape(T, S)
        v = 0.0
        for th in range(spec.n_params):
            d = spec.initial_state[th].copy()
            for t in range(T):
                v += spec.prior[th] * sum(d[s] * _expected_reward(spec, s, th, rule[t, s]) for s in range(S))
                d = sum(d[s] * spec.trans[s, rule[t, s], th] for s in range(S))
        best = max(best, v)
    return best
