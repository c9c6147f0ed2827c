"""Batch Monte Carlo roll-outs of Thompson sampling, used as an oracle for the exact tree.

Deliberately shares nothing with :mod:`mbr.inference` beyond the instance arrays
and the known-parameter policy: posteriors are updated episode by episode
from the sampled observations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .environment import EnvironmentSpec
from .probability import RandomSource, sample_rows


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    std: float
    n: int
    states: Optional[np.ndarray] = None
    actions: Optional[np.ndarray] = None
    rewards: Optional[np.ndarray] = None

    @property
    def stderr(self) -> float:
        return self.std / np.sqrt(self.n)

    def agrees_with(self, exact: float, n_sigma: float = 4.0) -> bool:
        return abs(self.mean - exact) <= n_sigma * self.stderr + 1e-12


def _draw(cdf_rows: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    return sample_rows(cdf_rows, gen.random(cdf_rows.shape[0]))


def _thompson_batch(spec, psi, gen, n, keep_paths):
    Th, T = spec.n_params, spec.horizon
    theta = _draw(np.broadcast_to(np.cumsum(spec.prior), (n, Th)), gen)
    state = _draw(np.cumsum(spec.initial_state[theta], axis=1), gen)
    post = np.broadcast_to(spec.prior, (n, Th)).copy()
    total = np.zeros(n)
    paths = [np.zeros((n, T), dtype=int) for _ in range(2)] + [np.zeros((n, T))] if keep_paths else None
    prev = None
    for t in range(T):
        # the current state joins the history only after this step
        w = post / post.sum(axis=1, keepdims=True)
        theta_hat = _draw(np.cumsum(w, axis=1), gen)
        action = psi[t, state, theta_hat]
        y = _draw(np.cumsum(spec.outcome[state, theta], axis=1), gen)
        r = spec.reward[y, action]
        total += r
        # likelihood of what the agent recorded: the state (given its predecessor) and the reward
        same_reward = spec.reward[:, action].T == r[:, None]  # (n, Y)
        lik_r = np.einsum("nty,ny->nt", spec.outcome[state], same_reward)
        if prev is None:
            lik_s = spec.initial_state[:, state].T
        else:
            ps, pa = prev
            lik_s = spec.trans[ps, pa, :, state]
        post = post * lik_r * lik_s
        nxt = _draw(np.cumsum(spec.trans[state, action, theta], axis=1), gen)
        if keep_paths:
            paths[0][:, t], paths[1][:, t], paths[2][:, t] = state, action, r
        prev = (state, action)
        state = nxt
    return total, paths


def simulate_thompson(spec: EnvironmentSpec, n_episodes: int, seed: int, psi: Optional[np.ndarray] = None,
                      batch: int = 100_000, keep_paths: bool = False) -> MonteCarloResult:
    """Mean cumulative reward of Thompson sampling over ``n_episodes`` roll-outs."""
    if psi is None:
        from .planning import optimal_policy_known_theta

        psi = optimal_policy_known_theta(spec)[0].dense
    gen = RandomSource(seed).generator
    totals, chunks = [], []
    done = 0
    while done < n_episodes:
        m = min(batch, n_episodes - done)
        tot, paths = _thompson_batch(spec, psi, gen, m, keep_paths)
        totals.append(tot)
        if keep_paths:
            chunks.append(paths)
        done += m
    allt = np.concatenate(totals)
    extra = {}
    if keep_paths:
        extra = {k: np.concatenate([c[i] for c in chunks]) for i, k in enumerate(("states", "actions", "rewards"))}
    return MonteCarloResult(float(allt.mean()), float(allt.std(ddof=1)) if n_episodes > 1 else 0.0,
                            int(n_episodes), **extra)
