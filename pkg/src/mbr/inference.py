"""Exact posteriors over the parameter and exhaustive history enumeration.

The history tree is stored densely, layer by layer. Layer ``t`` (1-based, up to
``T + 1``) holds ``lik[t][cell, s, theta] = P(h^t, S_t = s | theta)`` under the
generating policy, where ``cell`` indexes the recorded history ``h^t``. A cell of
layer ``t + 1`` is numbered ``(cell * S + s) * O + o`` from its parent, ``o``
running over :attr:`EnvironmentSpec.observations`. Zero-probability cells stay
in the arrays and are skipped wherever laws are reported.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .environment import EnvironmentSpec, PartialFeedbackSpec, Record
from .errors import BudgetExceeded, NotApplicable, NotPartialFeedback, NotStatic, ZeroLikelihood
from .probability import FiniteDistribution

DEFAULT_NODE_BUDGET = 10**6


def node_budget(budget: Optional[int] = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("MBR_NODE_BUDGET")
    return int(env) if env else DEFAULT_NODE_BUDGET


@dataclass(frozen=True)
class Posterior:
    dist: FiniteDistribution

    @property
    def weights(self) -> np.ndarray:
        return self.dist.weights


def _normalised(w: np.ndarray, what: str) -> Posterior:
    total = w.sum()
    if total <= 0:
        raise ZeroLikelihood(f"{what} has zero probability under every parameter in the support")
    w = w / total
    return Posterior(FiniteDistribution(w / w.sum()))


def prior_posterior(spec: EnvironmentSpec) -> Posterior:
    return Posterior(FiniteDistribution(spec.prior))


def condition_on_initial_state(spec: EnvironmentSpec, posterior: Posterior, state: int) -> Posterior:
    return _normalised(posterior.weights * spec.initial_state[:, state], f"initial state {state}")


def _reward_slot(spec: EnvironmentSpec, reward: float) -> int:
    k = int(np.searchsorted(spec.reward_values, reward))
    if k >= len(spec.reward_values) or spec.reward_values[k] != reward:
        raise ZeroLikelihood(f"reward {reward!r} is not in the reachable reward set")
    return k


def posterior_update(spec: EnvironmentSpec, posterior: Posterior, observed) -> Posterior:
    """Bayes step for ``observed = (state, action, reward, next_state)``.

    ``next_state`` may be ``None`` to fold in the reward only.
    """
    s, a, r, nxt = observed
    lik = spec.reward_likelihood[s, a, :, _reward_slot(spec, r)]
    if nxt is not None:
        lik = lik * spec.trans[s, a, :, nxt]
    return _normalised(posterior.weights * lik, f"observation {tuple(observed)!r}")


def posterior_from_history(spec: EnvironmentSpec, records, current_state: Optional[int] = None) -> Posterior:
    """``P(theta | h^t)``, or ``P(theta | h^t, S_t)`` when ``current_state`` is given."""
    records = tuple(records)
    post = prior_posterior(spec)
    if records:
        post = condition_on_initial_state(spec, post, records[0][0])
    elif current_state is not None:
        return condition_on_initial_state(spec, post, current_state)
    for i, (s, a, r) in enumerate(records):
        nxt = records[i + 1][0] if i + 1 < len(records) else current_state
        post = posterior_update(spec, post, (s, a, r, nxt))
    return post


@dataclass(frozen=True)
class HistoryNode:
    history: tuple
    time: int
    state: int
    probability: float
    per_theta_probability: np.ndarray


def expand_layer(spec: EnvironmentSpec, lik: np.ndarray, probs=None) -> np.ndarray:
    """Children of every node in a layer.

    ``probs`` gives action probabilities broadcastable to ``(C, S, A, Theta)``;
    ``None`` keeps every action with weight one (the decision tree used by
    Bayes-optimal planning).
    """
    F = spec.obs_factor  # (S, O, Th, S')
    C, S, Th = lik.shape
    if probs is None:
        new = lik[:, :, None, :, None] * F[None]
    else:
        pa = np.asarray(probs)[:, :, spec.obs_actions, :]  # (C|1, S, O, Th|1)
        new = lik[:, :, None, :, None] * pa[..., None] * F[None]
    new = np.moveaxis(new, 3, 4)  # (C, S, O, S', Th)
    return new.reshape(C * S * len(spec.observations), S, Th)


def check_budget(spec: EnvironmentSpec, n_cells: int, layer: int, budget: int) -> None:
    size = n_cells * spec.n_states * len(spec.observations) * spec.n_states
    if size > budget:
        raise BudgetExceeded(layer, size, budget)


def initial_layer(spec: EnvironmentSpec) -> np.ndarray:
    return spec.initial_state.T[None].copy()  # (1, S, Th)


class HistoryTree:
    """Enumerated histories under a fixed (possibly randomised) policy."""

    def __init__(self, spec: EnvironmentSpec, policy, lik: list, action_probs: list):
        self.spec = spec
        self.policy = policy
        self.lik = lik
        self.action_probs = action_probs

    @property
    def horizon(self) -> int:
        return self.spec.horizon

    def decode(self, t: int, cell: int) -> tuple:
        """Recorded history ``h^t`` of a layer-``t`` cell."""
        S, obs, values = self.spec.n_states, self.spec.observations, self.spec.reward_values
        O = len(obs)
        out = []
        for _ in range(t - 1):
            cell, o = divmod(cell, O)
            cell, s = divmod(cell, S)
            a, k = obs[o]
            out.append(Record(int(s), int(a), float(values[k])))
        return tuple(reversed(out))

    def joint(self, t: int) -> np.ndarray:
        """``P(theta, h^t, S_t)`` with shape ``(C, S, Theta)``."""
        return self.lik[t - 1] * self.spec.prior

    def cell_mass(self, t: int) -> np.ndarray:
        return self.joint(t).sum(axis=(1, 2))

    def nodes(self, t: int) -> list:
        J = self.joint(t)
        prob = J.sum(axis=2)
        out = []
        for c, s in zip(*np.nonzero(prob > 0)):
            out.append(HistoryNode(self.decode(t, int(c)), t, int(s), float(prob[c, s]),
                                   self.lik[t - 1][c, s].copy()))
        return out

    def layers(self) -> list:
        return [self.nodes(t) for t in range(1, self.horizon + 2)]

    def per_time_rewards(self) -> np.ndarray:
        ER = self.spec.expected_reward  # (S, Th, A)
        out = []
        for t in range(1, self.horizon + 1):
            J = self.joint(t)
            P = np.broadcast_to(self.action_probs[t - 1], J.shape[:2] + (self.spec.n_actions, J.shape[2]))
            out.append(float(np.einsum("cst,csat,sta->", J, P, ER)))
        return np.array(out)

    def to_json(self) -> list:
        """Layers as plain lists, for debugging dumps."""
        return [
            [
                {
                    "history": [list(r) for r in n.history],
                    "time": n.time,
                    "state": n.state,
                    "probability": n.probability,
                    "per_theta_probability": n.per_theta_probability.tolist(),
                }
                for n in layer
            ]
            for layer in self.layers()
        ]


def enumerate_history_tree(spec: EnvironmentSpec, policy="thompson", budget: Optional[int] = None) -> HistoryTree:
    """Every history reachable under ``policy`` with exact per-parameter probabilities.

    ``policy`` is a :class:`~mbr.policies.PolicyTable`, a
    :class:`~mbr.policies.ThompsonPolicy`, or the string ``"thompson"``.
    """
    if isinstance(policy, str):
        if policy != "thompson":
            raise ValueError(f"unknown policy {policy!r}")
        from .planning import thompson_policy

        policy = thompson_policy(spec)
    budget = node_budget(budget)
    lik = [initial_layer(spec)]
    probs = []
    for t in range(1, spec.horizon + 1):
        cur = lik[-1]
        check_budget(spec, cur.shape[0], t + 1, budget)
        P = policy.tree_action_probs(spec, t, cur, lambda c, t=t: _decode(spec, t, c))
        probs.append(P)
        lik.append(expand_layer(spec, cur, P))
    return HistoryTree(spec, policy, lik, probs)


def _decode(spec, t, cell):
    return HistoryTree(spec, None, [], []).decode(t, cell)


def state_laws_known_theta(spec: EnvironmentSpec, psi: np.ndarray) -> np.ndarray:
    """``d[t-1, theta, s] = P(S*_t = s | theta)`` when playing ``psi`` with theta known."""
    T = spec.horizon
    d = np.zeros((T + 1, spec.n_params, spec.n_states))
    d[0] = spec.initial_state
    th = np.arange(spec.n_params)
    for t in range(T):
        # row (s, theta) -> next-state law under action psi[t, s, theta]
        step = spec.trans[np.arange(spec.n_states)[:, None], psi[t], th[None, :]]  # (S, Th, S')
        d[t + 1] = np.einsum("ts,stu->tu", d[t], step)
    return d


# conditional laws -----------------------------------------------------------

YS_GIVEN_H = "(Y_t,S_t)|H^t"
YS_STAR_GIVEN_THETA = "(Y*_t,S*_t)|Theta"
Y_GIVEN_ASTAR_H = "Y_t|A*,H^t"
Y_GIVEN_H = "Y_t|H^t"
YA_GIVEN_ASTAR_H = "Y_t,A*|A*,H^t"
YA_GIVEN_H = "Y_t,A*|H^t"
ASTAR_GIVEN_H = "A*|H^t"
Y_GIVEN_ASTAR = "Y_t|A*"
YA_GIVEN_ASTAR = "Y_t,A*|A*"
YA_GIVEN_THETA = "Y_t,A*|Theta"

QUERIES = (YS_GIVEN_H, YS_STAR_GIVEN_THETA, Y_GIVEN_ASTAR_H, Y_GIVEN_H, YA_GIVEN_ASTAR_H,
           YA_GIVEN_H, ASTAR_GIVEN_H, Y_GIVEN_ASTAR, YA_GIVEN_ASTAR, YA_GIVEN_THETA)


class LayerLaws:
    """Unnormalised joint tables for one layer of a Thompson tree.

    Every table is a joint probability; divide by the matching cell weight to get
    the conditional law.
    """

    def __init__(self, tree: HistoryTree, t: int):
        spec = tree.spec
        self.tree = tree
        self.spec = spec
        self.t = t
        self.J = tree.joint(t)  # (C, S, Th)
        self.mass = self.J.sum(axis=(1, 2))  # P(h)
        self.theta_weight = self.J.sum(axis=1)  # P(h, theta)

    @property
    def psi(self):
        psi = getattr(self.tree.policy, "psi", None)
        if psi is None:
            raise NotApplicable("laws involving the optimal policy need a Thompson tree")
        return psi

    def ys_given_h(self) -> np.ndarray:
        """Joint ``P(h, Y_t = y, S_t = s)`` flattened to ``(C, Y*S)`` with index ``y*S + s``."""
        ys = np.einsum("cst,sty->cys", self.J, self.spec.outcome)
        return ys.reshape(ys.shape[0], -1)

    def ys_star_given_theta(self) -> np.ndarray:
        """``P(Y*_t = y, S*_t = s | theta)`` as ``(Theta, Y*S)``."""
        d = state_laws_known_theta(self.spec, self.psi)[self.t - 1]  # (Th, S)
        ys = np.einsum("ts,sty->tys", d, self.spec.outcome)
        return ys.reshape(ys.shape[0], -1)

    @property
    def gamma(self) -> np.ndarray:
        if not self.spec.is_static:
            raise NotStatic("A* is defined only for static instances")
        return self.tree.policy.gamma

    def astar_onehot(self) -> np.ndarray:
        return np.eye(self.spec.n_actions)[self.gamma]  # (Th, A)

    def y_astar_h(self) -> np.ndarray:
        """Joint ``P(h, A* = a, Y_t = y)`` as ``(C, A, Y)``."""
        return np.einsum("cst,sty,ta->cay", self.J, self.spec.outcome, self.astar_onehot())

    def _pf(self) -> PartialFeedbackSpec:
        if not isinstance(self.spec, PartialFeedbackSpec):
            raise NotPartialFeedback("per-action outcome laws need a partial-feedback instance")
        return self.spec

    def ya_astar_h(self) -> np.ndarray:
        """Joint ``P(h, A* = a, Y_{t,a} = y')`` as ``(C, A, Y')``."""
        pf = self._pf()
        return np.einsum("cay,ayz->caz", self.y_astar_h(), pf.projection)

    def ya_h(self) -> np.ndarray:
        """``P(h) * P(Y_{t,a} = y' | h)`` as ``(C, A, Y')``."""
        pf = self._pf()
        y_h = self.y_astar_h().sum(axis=1)  # (C, Y)
        return np.einsum("cy,ayz->caz", y_h, pf.projection)

    def y_given_theta(self) -> np.ndarray:
        """``P(Y_t = y | theta)`` as ``(Theta, Y)``; rows of zero-prior parameters are zero."""
        joint = np.einsum("cst,sty->ty", self.J, self.spec.outcome)
        tot = joint.sum(axis=1, keepdims=True)
        return np.divide(joint, tot, out=np.zeros_like(joint), where=tot > 0)

    def ya_given_theta(self) -> np.ndarray:
        """``P(Y_{t,gamma(theta)} = y' | theta)`` as ``(Theta, Y')``."""
        pf = self._pf()
        proj = pf.projection[self.gamma]  # (Th, Y, Y')
        return np.einsum("ty,tyz->tz", self.y_given_theta(), proj)


@dataclass
class ConditionalLaw:
    """Exact conditional laws per conditioning cell, zero-weight cells omitted."""

    query: str
    t: int
    cells: list  # (key, weight, FiniteDistribution)

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def as_dict(self) -> dict:
        return {key: (w, d) for key, w, d in self.cells}


def _rows(keys, weights, joint):
    cells = []
    for key, w, row in zip(keys, weights, joint):
        if w > 0:
            p = row / w
            cells.append((key, float(w), FiniteDistribution(p / p.sum())))
    return cells


def conditional_law(tree: HistoryTree, t: int, query: str) -> ConditionalLaw:
    """Exact law for one of :data:`QUERIES` at layer ``t`` of a Thompson tree."""
    if not 1 <= t <= tree.horizon:
        raise ValueError(f"t must be in 1..{tree.horizon}")
    L = LayerLaws(tree, t)
    C = L.J.shape[0]
    hkeys = [tree.decode(t, c) for c in range(C)]
    A = tree.spec.n_actions
    if query == YS_GIVEN_H:
        cells = _rows(hkeys, L.mass, L.ys_given_h())
    elif query == Y_GIVEN_H:
        joint = np.einsum("cst,sty->cy", L.J, tree.spec.outcome)
        cells = _rows(hkeys, L.mass, joint)
    elif query == YS_STAR_GIVEN_THETA:
        prior = tree.spec.prior
        cells = _rows(range(tree.spec.n_params), prior, L.ys_star_given_theta() * prior[:, None])
    elif query == ASTAR_GIVEN_H:
        joint = L.y_astar_h().sum(axis=2)
        cells = _rows(hkeys, L.mass, joint)
    elif query in (Y_GIVEN_ASTAR_H, YA_GIVEN_ASTAR_H):
        joint = L.y_astar_h() if query == Y_GIVEN_ASTAR_H else L.ya_astar_h()
        w = L.y_astar_h().sum(axis=2)
        keys = [(a, h) for h in hkeys for a in range(A)]
        cells = _rows(keys, w.ravel(), joint.reshape(C * A, -1))
    elif query == YA_GIVEN_H:
        w = L.y_astar_h().sum(axis=2)  # weight P(A* = a, h)
        cond = L.ya_h() / np.where(L.mass > 0, L.mass, 1.0)[:, None, None]
        keys = [(a, h) for h in hkeys for a in range(A)]
        cells = _rows(keys, w.ravel(), (cond * w[..., None]).reshape(C * A, -1))
    elif query in (Y_GIVEN_ASTAR, YA_GIVEN_ASTAR):
        joint = L.y_astar_h() if query == Y_GIVEN_ASTAR else L.ya_astar_h()
        joint = joint.sum(axis=0)
        cells = _rows(range(A), joint.sum(axis=1), joint)
    elif query == YA_GIVEN_THETA:
        prior = tree.spec.prior
        cells = _rows(range(tree.spec.n_params), prior, L.ya_given_theta() * prior[:, None])
    else:
        raise ValueError(f"unknown query {query!r}")
    return ConditionalLaw(query, t, cells)
