"""Finite Bayesian MDPs, their static / bandit / partial-feedback special cases,
and forward simulation.

Array layout used throughout the package::

    prior          (n_params,)
    initial_state  (n_params, n_states)
    trans          (n_states, n_actions, n_params, n_states)
    outcome        (n_states, n_params, n_outcomes)
    reward         (n_outcomes, n_actions)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import MeanOutOfRange, ValidationError
from .probability import MASS_TOL, RandomSource, sample, FiniteDistribution


class Record(NamedTuple):
    state: int
    action: int
    reward: float


History = tuple  # tuple[Record, ...]


def _arr(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, kw_only=True, eq=False)
class EnvironmentSpec:
    prior: np.ndarray
    initial_state: np.ndarray
    trans: np.ndarray
    outcome: np.ndarray
    reward: np.ndarray
    horizon: int
    name: str = ""

    def __post_init__(self):
        for f in ("prior", "initial_state", "trans", "outcome", "reward"):
            object.__setattr__(self, f, _arr(getattr(self, f)))
        n_th = self.prior.shape[0]
        n_s = self.initial_state.shape[1] if self.initial_state.ndim == 2 else -1
        n_a = self.reward.shape[1] if self.reward.ndim == 2 else -1
        n_y = self.reward.shape[0] if self.reward.ndim == 2 else -1
        expected = {
            "prior": (n_th,),
            "initial_state": (n_th, n_s),
            "trans": (n_s, n_a, n_th, n_s),
            "outcome": (n_s, n_th, n_y),
            "reward": (n_y, n_a),
        }
        for f, shape in expected.items():
            got = getattr(self, f).shape
            if got != shape or min(shape) <= 0:
                raise ValidationError(f"{f} has shape {got}, expected {shape}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValidationError(f"horizon must be a positive integer, got {self.horizon!r}")
        object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def n_states(self) -> int:
        return self.trans.shape[0]

    @property
    def n_actions(self) -> int:
        return self.trans.shape[1]

    @property
    def n_params(self) -> int:
        return self.prior.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.outcome.shape[2]

    @cached_property
    def is_static(self) -> bool:
        eye = np.eye(self.n_states)[:, None, None, :]
        return bool(np.all(self.trans == eye))

    @cached_property
    def reward_values(self) -> np.ndarray:
        return reachable_reward_set(self)

    @cached_property
    def reward_index(self) -> np.ndarray:
        """``reward_index[y, a]`` = position of ``reward[y, a]`` in :attr:`reward_values`."""
        return np.searchsorted(self.reward_values, self.reward)

    @cached_property
    def expected_reward(self) -> np.ndarray:
        """``ER[s, theta, a] = E[r(Y, a) | s, theta]``."""
        return np.einsum("sty,ya->sta", self.outcome, self.reward)

    @cached_property
    def observations(self) -> tuple:
        """Distinct (action, reward index) pairs an agent can record."""
        obs = []
        for a in range(self.n_actions):
            for k in np.unique(self.reward_index[:, a]):
                obs.append((a, int(k)))
        return tuple(obs)

    @cached_property
    def reward_likelihood(self) -> np.ndarray:
        """``L[s, a, theta, k] = P(R = reward_values[k] | s, a, theta)``."""
        K = len(self.reward_values)
        onehot = np.zeros((self.n_outcomes, self.n_actions, K))
        y, a = np.indices(self.reward.shape)
        onehot[y, a, self.reward_index] = 1.0
        return np.einsum("sty,yak->satk", self.outcome, onehot)

    @cached_property
    def obs_factor(self) -> np.ndarray:
        """``F[s, o, theta, s']``: likelihood of observation ``o`` then state ``s'``."""
        acts = np.array([a for a, _ in self.observations])
        ks = np.array([k for _, k in self.observations])
        lik = self.reward_likelihood[:, acts, :, ks]  # (O, S, Th) after fancy indexing
        lik = np.moveaxis(lik, 0, 1)  # (S, O, Th)
        tr = self.trans[:, acts]  # (S, O, Th, S')
        return lik[..., None] * tr

    @cached_property
    def obs_actions(self) -> np.ndarray:
        return np.array([a for a, _ in self.observations], dtype=int)

    def with_horizon(self, horizon: int) -> "EnvironmentSpec":
        return _replace(self, horizon=horizon)

    def with_prior(self, prior) -> "EnvironmentSpec":
        return _replace(self, prior=prior)


def _replace(spec, **changes):
    import dataclasses

    return dataclasses.replace(spec, **changes)


@dataclass(frozen=True, kw_only=True, eq=False)
class PartialFeedbackSpec(EnvironmentSpec):
    """Static instance whose outcome is a vector of per-action outcomes.

    Outcome index ``y`` encodes the vector ``(y_0, ..., y_{A-1})`` in C order,
    so action 0 is the most significant digit. ``reward[y, a]`` must equal
    ``preference[y_a]``.
    """

    preference: np.ndarray
    full_reveal: bool = False

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "preference", _arr(self.preference))
        object.__setattr__(self, "full_reveal", bool(self.full_reveal))
        problems = _pf_violations(self)
        if problems:
            raise ValidationError(problems)

    @property
    def n_pf_outcomes(self) -> int:
        return self.preference.shape[0]

    @cached_property
    def components(self) -> np.ndarray:
        """``components[y, a]`` = per-action outcome of action ``a`` inside ``y``."""
        shape = (self.n_pf_outcomes,) * self.n_actions
        return np.stack(np.unravel_index(np.arange(self.n_outcomes), shape), axis=1)

    @cached_property
    def projection(self) -> np.ndarray:
        """``P[a, y, y'] = 1`` when coordinate ``a`` of ``y`` is ``y'``."""
        P = np.zeros((self.n_actions, self.n_outcomes, self.n_pf_outcomes))
        for a in range(self.n_actions):
            P[a, np.arange(self.n_outcomes), self.components[:, a]] = 1.0
        return P

    @property
    def base(self) -> EnvironmentSpec:
        return EnvironmentSpec(
            prior=self.prior,
            initial_state=self.initial_state,
            trans=self.trans,
            outcome=self.outcome,
            reward=self.reward,
            horizon=self.horizon,
            name=self.name,
        )


def _pf_violations(pf: PartialFeedbackSpec) -> list:
    out = []
    n_pf = pf.preference.shape[0] if pf.preference.ndim == 1 else 0
    if n_pf == 0 or n_pf ** pf.n_actions != pf.n_outcomes:
        return [f"outcome space of size {pf.n_outcomes} is not (Y')^{pf.n_actions} with |Y'| = {n_pf}"]
    expected = pf.preference[pf.components]
    bad = np.argwhere(expected != pf.reward)
    for y, a in bad[:5]:
        out.append(f"reward[{y}][{a}] = {pf.reward[y, a]!r} but preference of component gives {expected[y, a]!r}")
    if not pf.is_static:
        out.append("partial-feedback base must be static")
    if not np.all(pf.outcome == pf.outcome[:1]):
        out.append("partial-feedback outcome kernel must not depend on the state")
    if len(np.unique(pf.preference)) != n_pf:
        out.append("preference must be injective so recorded rewards identify per-action outcomes")
    if pf.full_reveal:
        support = np.flatnonzero(pf.outcome.sum(axis=(0, 1)) > 0)
        for a in range(pf.n_actions):
            coords = pf.components[support, a]
            if len(np.unique(coords)) != len(coords):
                out.append(f"full_reveal set but coordinate {a} does not identify the outcome vector")
                break
    return out


@dataclass(frozen=True)
class BoundedRewardCertificate:
    lo: float
    hi: float
    sub_gaussian_sigma2: float


def reward_certificate(spec: EnvironmentSpec) -> BoundedRewardCertificate:
    lo, hi = float(spec.reward.min()), float(spec.reward.max())
    return BoundedRewardCertificate(lo, hi, (hi - lo) ** 2 / 4.0)


def rewards_in_unit_interval(spec: EnvironmentSpec) -> bool:
    return bool(spec.reward.min() >= 0.0 and spec.reward.max() <= 1.0)


def reachable_reward_set(spec: EnvironmentSpec) -> np.ndarray:
    """Sorted distinct values of the reward table (exact float equality)."""
    return np.unique(spec.reward)


def validate(spec: EnvironmentSpec) -> list:
    """Return a list of invariant violations; empty means the instance is valid."""
    out = []

    def rows(arr, label):
        sums = arr.sum(axis=-1)
        neg = (arr < 0).any(axis=-1)
        finite = np.isfinite(arr).all(axis=-1)
        bad = (np.abs(sums - 1.0) > MASS_TOL) | neg | ~finite
        for idx in np.argwhere(bad):
            key = ",".join(str(int(i)) for i in idx)
            out.append(f"{label}({key}) is not a distribution (sum {sums[tuple(idx)]!r})")

    rows(spec.prior[None, :], "prior")
    rows(spec.initial_state, "initial_state")
    rows(spec.trans, "trans")
    rows(spec.outcome, "outcome")
    for y, a in np.argwhere(~np.isfinite(spec.reward)):
        out.append(f"reward({y},{a}) is not finite")
    return out


def check(spec: EnvironmentSpec) -> EnvironmentSpec:
    problems = validate(spec)
    if problems:
        raise ValidationError(problems)
    return spec


def bernoulli_bandit(means, prior, horizon: int, name: str = "") -> PartialFeedbackSpec:
    """Bernoulli bandit with ``means[arm, theta]``; outcomes are per-arm bit vectors."""
    means = np.asarray(means, dtype=float)
    if means.ndim != 2:
        raise ValueError("means must be a table (arm, theta)")
    if np.any((means < 0) | (means > 1)) or not np.all(np.isfinite(means)):
        raise MeanOutOfRange("Bernoulli means must lie in [0, 1]")
    n_a, n_th = means.shape
    prior = np.asarray(getattr(prior, "weights", prior), dtype=float)
    bits = np.array(list(itertools.product((0, 1), repeat=n_a)))  # (Y, A)
    # P(y | theta) = prod_a mean^bit (1-mean)^(1-bit)
    p = np.where(bits[:, :, None] == 1, means[None], 1.0 - means[None])  # (Y, A, Th)
    outcome = p.prod(axis=1).T[None]  # (1, Th, Y)
    return PartialFeedbackSpec(
        prior=prior,
        initial_state=np.ones((n_th, 1)),
        trans=np.ones((1, n_a, n_th, 1)),
        outcome=outcome,
        reward=bits.astype(float),
        horizon=horizon,
        preference=[0.0, 1.0],
        full_reveal=False,
        name=name,
    )


def partial_feedback(outcome, preference, horizon: int, prior, *, full_reveal=False,
                     initial_state=None, name: str = "") -> PartialFeedbackSpec:
    """Build a partial-feedback instance from ``outcome[theta, y]`` over outcome vectors."""
    outcome = np.asarray(outcome, dtype=float)
    preference = np.asarray(preference, dtype=float)
    n_th, n_y = outcome.shape
    n_pf = len(preference)
    n_a = int(round(np.log(n_y) / np.log(n_pf))) if n_pf > 1 else 1
    comps = np.stack(np.unravel_index(np.arange(n_y), (n_pf,) * n_a), axis=1)
    if initial_state is None:
        initial_state = np.ones((n_th, 1))
    initial_state = np.asarray(initial_state, dtype=float)
    n_s = initial_state.shape[1]
    eye = np.eye(n_s)[:, None, None, :]
    return PartialFeedbackSpec(
        prior=prior,
        initial_state=initial_state,
        trans=np.broadcast_to(eye, (n_s, n_a, n_th, n_s)).copy(),
        outcome=np.broadcast_to(outcome, (n_s, n_th, n_y)).copy(),
        reward=preference[comps],
        horizon=horizon,
        preference=preference,
        full_reveal=full_reveal,
        name=name,
    )


def simulate_episode(spec: EnvironmentSpec, policy, theta: int, rng: RandomSource):
    """Roll out one episode under parameter ``theta``.

    ``policy`` must provide ``act(t, state, records, theta, rng) -> action``.
    Returns ``(records, cumulative_reward)``.
    """
    state = sample(FiniteDistribution(spec.initial_state[theta]), rng)
    records = []
    total = 0.0
    for t in range(1, spec.horizon + 1):
        a = policy.act(t, state, tuple(records), theta, rng)
        y = sample(FiniteDistribution(spec.outcome[state, theta]), rng)
        r = float(spec.reward[y, a])
        nxt = sample(FiniteDistribution(spec.trans[state, a, theta]), rng)
        if spec.is_static and nxt != state:
            raise AssertionError("static environment changed state")
        records.append(Record(state, a, r))
        total += r
        state = nxt
    return tuple(records), total
