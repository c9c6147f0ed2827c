"""Decision rules: deterministic policy tables and the Thompson-sampling rule.

Both kinds expose the same two hooks:

* ``act(t, state, records, theta, rng)`` for Monte Carlo roll-outs, and
* ``tree_action_probs(spec, t, lik, decode)`` for exact tree enumeration, returning
  an array broadcastable to ``(cells, states, actions, params)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NotApplicable, PolicyUndefined
from .probability import FiniteDistribution, sample

KINDS = ("history", "theta", "knowledge", "processed")


@dataclass
class PolicyTable:
    """Deterministic rule per time step: ``rules[t-1][(state, info)] -> action``.

    ``info`` is the record tuple for ``kind="history"``, the parameter index for
    ``kind="theta"``, and the knowledge / processed symbol sequence otherwise.
    """

    kind: str
    rules: list
    n_actions: int
    dense: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown information kind {self.kind!r}")

    @property
    def horizon(self) -> int:
        return len(self.rules)

    @classmethod
    def from_theta_array(cls, psi: np.ndarray, n_actions: int) -> "PolicyTable":
        """Wrap a dense ``psi[t, s, theta]`` action array."""
        psi = np.asarray(psi, dtype=int)
        T, S, Th = psi.shape
        rules = [{(s, th): int(psi[t, s, th]) for s in range(S) for th in range(Th)} for t in range(T)]
        return cls("theta", rules, int(n_actions), dense=psi)

    def action(self, t: int, state: int, info) -> int:
        try:
            return self.rules[t - 1][(state, info)]
        except (KeyError, IndexError):
            raise PolicyUndefined(f"no action at t={t}, state={state}, info={info!r}") from None

    def act(self, t, state, records, theta, rng=None) -> int:
        if self.kind == "history":
            return self.action(t, state, tuple(records))
        if self.kind == "theta":
            return self.action(t, state, theta)
        raise NotApplicable(f"cannot roll out a {self.kind}-kind policy without its kernels")

    def tree_action_probs(self, spec, t, lik, decode):
        C, S, Th = lik.shape
        A = spec.n_actions
        if self.kind == "theta":
            if self.dense is not None:
                onehot = np.eye(A)[self.dense[t - 1]]  # (S, Th, A)
            else:
                onehot = np.zeros((S, Th, A))
                for s in range(S):
                    for th in range(Th):
                        if spec.prior[th] > 0 and lik[:, s, th].any():
                            onehot[s, th, self.action(t, s, th)] = 1.0
            return np.transpose(onehot, (0, 2, 1))[None]  # (1, S, A, Th)
        if self.kind == "history":
            out = np.zeros((C, S, A, 1))
            live = (lik * spec.prior).sum(axis=2) > 0
            for c, s in zip(*np.nonzero(live)):
                out[c, s, self.action(t, int(s), decode(int(c))), 0] = 1.0
            return out
        raise NotApplicable(f"cannot enumerate histories under a {self.kind}-kind policy")


def gamma_star(psi: np.ndarray) -> np.ndarray:
    """Optimal action per parameter when ``psi[t, s, theta]`` ignores ``(t, s)``.

    Raises :class:`NotApplicable` otherwise.
    """
    psi = np.asarray(psi)
    gamma = psi[0, 0]
    if not np.all(psi == gamma[None, None, :]):
        raise NotApplicable("optimal action depends on time or state; A* is undefined")
    return gamma.astype(int)


@dataclass
class ThompsonPolicy:
    """Sample ``theta_hat ~ P(theta | h^t)`` and play ``psi_star[t, s, theta_hat]``.

    The posterior conditions on the recorded history only; the current state is
    not folded in.
    """

    spec: object
    psi_star: PolicyTable

    @property
    def psi(self) -> np.ndarray:
        return self.psi_star.dense

    @property
    def gamma(self) -> np.ndarray:
        return gamma_star(self.psi)

    def distribution(self, t: int, state: int, posterior) -> np.ndarray:
        w = np.asarray(getattr(posterior, "weights", posterior), dtype=float)
        probs = np.zeros(self.spec.n_actions)
        np.add.at(probs, self.psi[t - 1, state], w)
        return probs

    def act(self, t, state, records, theta, rng) -> int:
        from .inference import posterior_from_history

        post = posterior_from_history(self.spec, records)
        theta_hat = sample(post.dist, rng)
        return int(self.psi[t - 1, state, theta_hat])

    def tree_action_probs(self, spec, t, lik, decode):
        post = (lik.sum(axis=1) * spec.prior[None, :])  # (C, Th), unnormalised
        mass = post.sum(axis=1, keepdims=True)
        post = np.divide(post, mass, out=np.zeros_like(post), where=mass > 0)
        onehot = np.eye(spec.n_actions)[self.psi[t - 1]]  # (S, Th, A)
        probs = np.einsum("ct,sta->csa", post, onehot)
        return probs[..., None]  # (C, S, A, 1)
