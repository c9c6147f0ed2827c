"""Exact planning: known-parameter optimum, Bayes-optimal value, Thompson sampling.

Every maximisation breaks ties toward the lowest action index. Ties are detected
with a tolerance relative to the largest magnitude in the compared row, so
scaling all rewards by a positive constant never changes a chosen action.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .environment import EnvironmentSpec, Record
from .errors import BudgetExceeded, InvalidDistribution
from .inference import (
    HistoryTree,
    check_budget,
    enumerate_history_tree,
    expand_layer,
    initial_layer,
    node_budget,
    state_laws_known_theta,
)
from .policies import PolicyTable, ThompsonPolicy
from .probability import MASS_TOL

TIE_RTOL = 1e-12


def argmax_lowest(Q: np.ndarray, axis: int = -1) -> np.ndarray:
    """Index of the maximum along ``axis``, the lowest one among near-ties."""
    Q = np.asarray(Q, dtype=float)
    top = Q.max(axis=axis, keepdims=True)
    tol = TIE_RTOL * np.abs(Q).max(axis=axis, keepdims=True)
    return np.argmax(Q >= top - tol, axis=axis)


@dataclass
class ValueReport:
    value: float
    policy: Optional[PolicyTable]
    per_time_values: np.ndarray

    def __post_init__(self):
        self.per_time_values = np.asarray(self.per_time_values, dtype=float)


# known parameter ------------------------------------------------------------

def optimal_policy_known_theta(spec: EnvironmentSpec):
    """Per-parameter backward induction; returns ``(psi_star, report)``."""
    S, A, Th, T = spec.n_states, spec.n_actions, spec.n_params, spec.horizon
    ER = spec.expected_reward  # (S, Th, A)
    V = np.zeros((S, Th))
    psi = np.zeros((T, S, Th), dtype=int)
    for t in range(T - 1, -1, -1):
        Q = ER + np.einsum("satu,ut->sta", spec.trans, V)
        psi[t] = argmax_lowest(Q, axis=2)
        V = np.take_along_axis(Q, psi[t][..., None], axis=2)[..., 0]
    d = state_laws_known_theta(spec, psi)  # (T+1, Th, S)
    chosen = np.take_along_axis(ER[None], psi[..., None], axis=3)[..., 0]  # (T, S, Th)
    per_time = np.einsum("t,kts,kst->k", spec.prior, d[:T], chosen)
    table = PolicyTable.from_theta_array(psi, A)
    return table, ValueReport(float(per_time.sum()), table, per_time)


def fundamental_limit(spec: EnvironmentSpec) -> float:
    return optimal_policy_known_theta(spec)[1].value


# Bayes-optimal over histories ---------------------------------------------

def _history_tree_all_actions(spec: EnvironmentSpec, budget: int) -> list:
    lik = [initial_layer(spec)]
    for t in range(1, spec.horizon + 1):
        check_budget(spec, lik[-1].shape[0], t + 1, budget)
        lik.append(expand_layer(spec, lik[-1]))
    return lik


def bcr_exact(spec: EnvironmentSpec, budget: Optional[int] = None, with_policy: bool = True) -> ValueReport:
    """Best expected reward over deterministic history-dependent policies.

    ``with_policy=False`` skips materialising the rule dictionary, which is the
    slow part on large trees.
    """
    budget = node_budget(budget)
    S, A, T = spec.n_states, spec.n_actions, spec.horizon
    O = len(spec.observations)
    obs_onehot = np.eye(A)[spec.obs_actions]  # (O, A)
    lik = _history_tree_all_actions(spec, budget)
    ER = spec.expected_reward
    V_next = None
    choice = [None] * T
    for t in range(T, 0, -1):
        J = lik[t - 1] * spec.prior  # (C, S, Th)
        Q = np.einsum("cst,sta->csa", J, ER)
        if V_next is not None:
            cont = V_next.sum(axis=1).reshape(J.shape[0], S, O)
            Q = Q + cont @ obs_onehot
        choice[t - 1] = argmax_lowest(Q, axis=2)  # (C, S)
        V_next = np.take_along_axis(Q, choice[t - 1][..., None], axis=2)[..., 0]
    value = float(V_next.sum())

    # forward pass under the maximiser for per-step values and the rule table
    rules = [dict() for _ in range(T)]
    cur = initial_layer(spec)
    per_time = np.zeros(T)
    tree = HistoryTree(spec, None, [], [])
    for t in range(1, T + 1):
        P = np.eye(A)[choice[t - 1]][..., None]  # (C, S, A, 1)
        J = cur * spec.prior
        per_time[t - 1] = np.einsum("cst,csa,sta->", J, P[..., 0], ER)
        if with_policy:
            live = J.sum(axis=2) > 0
            for c, s in zip(*np.nonzero(live)):
                rules[t - 1][(int(s), tree.decode(t, int(c)))] = int(choice[t - 1][c, s])
        cur = expand_layer(spec, cur, P)
    policy = PolicyTable("history", rules, A) if with_policy else None
    return ValueReport(value, policy, per_time)


# Thompson sampling ----------------------------------------------------------

def thompson_policy(spec: EnvironmentSpec, psi_star: Optional[PolicyTable] = None) -> ThompsonPolicy:
    if psi_star is None:
        psi_star, _ = optimal_policy_known_theta(spec)
    return ThompsonPolicy(spec, psi_star)


def policy_value(spec: EnvironmentSpec, policy, budget: Optional[int] = None) -> ValueReport:
    """Exact value of a history or parameter policy, or of Thompson sampling."""
    tree = enumerate_history_tree(spec, policy, budget)
    per_time = tree.per_time_rewards()
    table = policy if isinstance(policy, PolicyTable) else None
    return ValueReport(float(per_time.sum()), table, per_time)


def thompson_value(spec: EnvironmentSpec, budget: Optional[int] = None, tree: Optional[HistoryTree] = None) -> ValueReport:
    if tree is None:
        tree = enumerate_history_tree(spec, thompson_policy(spec), budget)
    per_time = tree.per_time_rewards()
    return ValueReport(float(per_time.sum()), tree.policy.psi_star, per_time)


def mbr(spec: EnvironmentSpec, budget: Optional[int] = None) -> float:
    return fundamental_limit(spec) - bcr_exact(spec, budget, with_policy=False).value


# knowledge and processing kernels ------------------------------------------

@dataclass
class KnowledgeKernelSpec:
    """``table[s, a, y, theta, x]`` gives the law of the next knowledge symbol.

    The first symbol is drawn from ``initial[theta, x]``; by default it is the
    constant 0, so the agent starts with no knowledge.
    """

    knowledge_space_size: int
    table: np.ndarray
    initial: Optional[np.ndarray] = None

    def __post_init__(self):
        X = int(self.knowledge_space_size)
        self.table = np.asarray(self.table, dtype=float)
        if self.table.ndim != 5 or self.table.shape[-1] != X:
            raise InvalidDistribution(f"knowledge table must be (S, A, Y, Theta, {X})")
        if self.initial is None:
            self.initial = np.zeros((self.table.shape[3], X))
            self.initial[:, 0] = 1.0
        self.initial = np.asarray(self.initial, dtype=float)
        for name, arr in (("table", self.table), ("initial", self.initial)):
            if np.any(arr < 0) or np.any(np.abs(arr.sum(axis=-1) - 1) > MASS_TOL):
                raise InvalidDistribution(f"knowledge {name} rows must be distributions")

    def check_against(self, spec: EnvironmentSpec) -> None:
        want = (spec.n_states, spec.n_actions, spec.n_outcomes, spec.n_params)
        if self.table.shape[:4] != want or self.initial.shape[0] != spec.n_params:
            raise InvalidDistribution(f"knowledge table shape {self.table.shape} does not fit {want}")


def history_knowledge(spec: EnvironmentSpec) -> KnowledgeKernelSpec:
    """Knowledge symbol = recorded (state, action, reward index); recovers the history."""
    S, A, Y, Th = spec.n_states, spec.n_actions, spec.n_outcomes, spec.n_params
    K = len(spec.reward_values)
    table = np.zeros((S, A, Y, Th, S * A * K))
    for s, a, y in itertools.product(range(S), range(A), range(Y)):
        table[s, a, y, :, (s * A + a) * K + spec.reward_index[y, a]] = 1.0
    return KnowledgeKernelSpec(S * A * K, table)


def theta_knowledge(spec: EnvironmentSpec) -> KnowledgeKernelSpec:
    """Knowledge symbol = the parameter itself, from the very first step."""
    S, A, Y, Th = spec.n_states, spec.n_actions, spec.n_outcomes, spec.n_params
    eye = np.eye(Th)
    table = np.broadcast_to(eye, (S, A, Y, Th, Th)).copy()
    return KnowledgeKernelSpec(Th, table, initial=eye.copy())


def _knowledge_step(spec, know, A_of_s, W):
    """Push ``W[n, theta, s]`` through per-node action maps ``A_of_s[n, s]``.

    Returns ``W'[n, x, theta, s']``.
    """
    s_idx = np.arange(spec.n_states)
    K = know.table[s_idx[None, :], A_of_s]  # (N, S, Y, Th, X)
    Tr = spec.trans[s_idx[None, :], A_of_s]  # (N, S, Th, S')
    return np.einsum("nts,sty,nsytx,nstu->nxtu", W, spec.outcome, K, Tr)


def bcr_with_knowledge(spec: EnvironmentSpec, know: KnowledgeKernelSpec, budget: Optional[int] = None) -> ValueReport:
    """Best value over rules ``phi_t(S_t, X^t)`` by exact recursion on knowledge prefixes.

    A node of layer ``t`` is a knowledge prefix reached through a sequence of
    state-to-action maps; the maps are chosen jointly because the rule at the
    next step cannot see which state produced the next symbol.
    """
    know.check_against(spec)
    budget = node_budget(budget)
    S, A, Th, T = spec.n_states, spec.n_actions, spec.n_params, spec.horizon
    X = know.knowledge_space_size
    maps = np.array(list(itertools.product(range(A), repeat=S)), dtype=int)  # (G, S)
    G = len(maps)
    ER = spec.expected_reward

    # layer 1: one node per first knowledge symbol
    W = np.einsum("t,tx,ts->xts", spec.prior, know.initial, spec.initial_state)
    layers = [W]
    for t in range(1, T):
        N = layers[-1].shape[0]
        size = N * G * X * Th * S
        if size > budget:
            raise BudgetExceeded(t + 1, size, budget)
        Wg = np.repeat(layers[-1], G, axis=0)
        nxt = _knowledge_step(spec, know, np.tile(maps, (N, 1)), Wg)
        layers.append(nxt.reshape(N * G * X, Th, S))

    # backward: V[n] at layer t; node children laid out as (n * G + g) * X + x
    V = None
    best = [None] * T
    for t in range(T, 0, -1):
        W = layers[t - 1]
        per_s = np.einsum("nts,sta->nsa", W, ER)  # (N, S, A)
        imm = per_s[:, np.arange(S)[None, :], maps].sum(axis=2)  # (N, G)
        tot = imm if V is None else imm + V.reshape(W.shape[0], G, X).sum(axis=2)
        best[t - 1] = argmax_lowest(tot, axis=1)
        V = np.take_along_axis(tot, best[t - 1][:, None], axis=1)[:, 0]
        if t == T:
            # the last map may be chosen state by state
            best[t - 1] = None
            V = per_s.max(axis=2).sum(axis=1)
            last_actions = argmax_lowest(per_s, axis=2)
    value = float(V.sum())

    # forward along the maximiser: rules keyed by (state, knowledge prefix)
    rules = [dict() for _ in range(T)]
    per_time = np.zeros(T)
    frontier = {(x,): x for x in range(X)}
    for t in range(1, T + 1):
        W = layers[t - 1]
        nxt = {}
        for prefix, n in frontier.items():
            if t == T:
                acts = last_actions[n]
            else:
                g = int(best[t - 1][n])
                acts = maps[g]
                for x in range(X):
                    nxt[prefix + (x,)] = (n * G + g) * X + x
            mass = W[n].sum(axis=0)
            for s in range(S):
                if mass[s] > 0:
                    rules[t - 1][(s, prefix)] = int(acts[s])
                    per_time[t - 1] += float(W[n, :, s] @ ER[s, :, acts[s]])
        frontier = nxt
    return ValueReport(value, PolicyTable("knowledge", rules, A), per_time)


@dataclass
class ProcessingKernelSpec:
    """``tables[t-1][x^t, z]``; ``x^t`` is indexed in base ``|X|``, oldest symbol most significant."""

    processed_space_size: int
    tables: list = field(default_factory=list)

    def __post_init__(self):
        Z = int(self.processed_space_size)
        self.tables = [np.asarray(tb, dtype=float) for tb in self.tables]
        for t, tb in enumerate(self.tables, start=1):
            if tb.ndim != 2 or tb.shape[1] != Z:
                raise InvalidDistribution(f"processing table {t} must have {Z} columns")
            if np.any(tb < 0) or np.any(np.abs(tb.sum(axis=1) - 1) > MASS_TOL):
                raise InvalidDistribution(f"processing table {t} rows must be distributions")

    def check_against(self, know: KnowledgeKernelSpec, horizon: int) -> None:
        X = know.knowledge_space_size
        if len(self.tables) != horizon:
            raise InvalidDistribution(f"need {horizon} processing tables, got {len(self.tables)}")
        for t, tb in enumerate(self.tables, start=1):
            if tb.shape[0] != X**t:
                raise InvalidDistribution(f"processing table {t} must have {X ** t} rows")


def identity_processing(know: KnowledgeKernelSpec, horizon: int) -> ProcessingKernelSpec:
    """``Z_t = X^t`` through product coding (processed space sized for the longest prefix)."""
    X = know.knowledge_space_size
    Z = X**horizon
    tables = [np.eye(X**t, Z) for t in range(1, horizon + 1)]
    return ProcessingKernelSpec(Z, tables)


def constant_processing(know: KnowledgeKernelSpec, horizon: int) -> ProcessingKernelSpec:
    X = know.knowledge_space_size
    return ProcessingKernelSpec(1, [np.ones((X**t, 1)) for t in range(1, horizon + 1)])


def bcr_with_processing(spec: EnvironmentSpec, know: KnowledgeKernelSpec, proc: ProcessingKernelSpec,
                        budget: Optional[int] = None) -> ValueReport:
    """Best value over rules ``psi_t(S_t, Z_t)`` by enumerating every rule per step.

    Only ``(s, z)`` pairs with positive probability are given a choice; the
    final step is solved greedily per pair.
    """
    know.check_against(spec)
    proc.check_against(know, spec.horizon)
    budget = node_budget(budget)
    S, A, Th, T = spec.n_states, spec.n_actions, spec.n_params, spec.horizon
    X = know.knowledge_space_size
    ER = spec.expected_reward
    s_idx = np.arange(S)

    def pushforward(W, P, t):
        # W[theta, s, x^t], P[s, x^t, a] -> W'[theta, s', x^{t+1}]
        size = W.size * X * S
        if size > budget:
            raise BudgetExceeded(t + 1, size, budget)
        out = np.einsum("tsm,sma,sty,saytx,satu->tumx", W, P, spec.outcome, know.table, spec.trans)
        return out.reshape(Th, S, -1)

    def solve(t, W):
        """Best remaining value and its rules from step ``t`` given ``W[theta, s, x^t]``."""
        proc_t = proc.tables[t - 1]  # (M, Z)
        # per (s, z): reward of each action
        Qsz = np.einsum("tsm,mz,sta->sza", W, proc_t, ER)
        keys = np.argwhere(np.einsum("tsm,mz->sz", W, proc_t) > 0)
        if t == T:
            acts = argmax_lowest(Qsz, axis=2)
            rule = {(int(s), int(z)): int(acts[s, z]) for s, z in keys}
            return float(Qsz.max(axis=2).sum()), [rule], [float(Qsz.max(axis=2).sum())]
        best = None
        for choice in itertools.product(range(A), repeat=len(keys)):
            act = np.zeros(Qsz.shape[:2], dtype=int)
            if len(keys):
                act[keys[:, 0], keys[:, 1]] = choice
            imm = float(np.take_along_axis(Qsz, act[..., None], axis=2).sum())
            P = np.einsum("mz,sza->sma", proc_t, np.eye(A)[act])
            v, rules, per = solve(t + 1, pushforward(W, P, t))
            if best is None or imm + v > best[0] + TIE_RTOL * max(abs(best[0]), abs(imm + v)):
                rule = {(int(s), int(z)): int(act[s, z]) for s, z in keys}
                best = (imm + v, [rule] + rules, [imm] + per)
        return best

    W1 = np.einsum("t,tm,ts->tsm", spec.prior, know.initial, spec.initial_state)
    value, rules, per_time = solve(1, W1)
    return ValueReport(value, PolicyTable("processed", rules, A), np.array(per_time))


def memoryless_value(spec: EnvironmentSpec, act: np.ndarray) -> float:
    """Value of the state-feedback rule ``act[t, s]``, evaluated per parameter."""
    psi = np.repeat(np.asarray(act, dtype=int)[..., None], spec.n_params, axis=2)
    d = state_laws_known_theta(spec, psi)
    ER = spec.expected_reward
    chosen = np.take_along_axis(ER[None], psi[..., None], axis=3)[..., 0]  # (T, S, Th)
    return float(np.einsum("t,kts,kst->", spec.prior, d[: spec.horizon], chosen))


__all__ = [
    "KnowledgeKernelSpec",
    "ProcessingKernelSpec",
    "Record",
    "ValueReport",
    "argmax_lowest",
    "bcr_exact",
    "bcr_with_knowledge",
    "bcr_with_processing",
    "constant_processing",
    "fundamental_limit",
    "history_knowledge",
    "identity_processing",
    "mbr",
    "memoryless_value",
    "optimal_policy_known_theta",
    "policy_value",
    "theta_knowledge",
    "thompson_policy",
    "thompson_value",
]
