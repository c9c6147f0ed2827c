"""Seeded random instances and random knowledge / processing kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import EnvironmentSpec, partial_feedback
from .planning import KnowledgeKernelSpec, ProcessingKernelSpec, history_knowledge
from .probability import RandomSource

REWARD_GRID = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
KINDS = ("general", "static", "partial_feedback")


@dataclass(frozen=True)
class SizeCaps:
    s: int = 3
    a: int = 3
    y: int = 3
    theta: int = 3
    T: int = 3

    @classmethod
    def parse(cls, text: str) -> "SizeCaps":
        """Parse ``"s=3,a=3,y=3,theta=3,T=3"``; omitted keys keep their defaults."""
        values = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, _, val = part.partition("=")
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"unknown cap {key!r}")
            values[key] = int(val)
        caps = cls(**values)
        if min(caps.s, caps.a, caps.y, caps.theta, caps.T) < 1:
            raise ValueError("caps must be positive")
        return caps


DPI_CAPS = SizeCaps(s=2, a=2, y=2, theta=3, T=3)


def _simplex(gen: np.random.Generator, shape) -> np.ndarray:
    # normalised positive uniforms; the offset keeps every entry strictly positive
    raw = gen.random(shape) + 1e-3
    return raw / raw.sum(axis=-1, keepdims=True)


def generate_random_instance(seed: int, caps: SizeCaps = SizeCaps(), stream_id: int = 0,
                             kind: str | None = None) -> EnvironmentSpec:
    """Draw one instance; ``(seed, stream_id)`` fixes it completely.

    ``kind`` picks general MDP, static MDP (state-independent outcomes) or
    partial feedback; by default it is drawn uniformly.
    """
    gen = RandomSource(seed, stream_id).generator
    if kind is None:
        kind = KINDS[int(gen.integers(len(KINDS)))]
    n_th = int(gen.integers(1, caps.theta + 1))
    T = int(gen.integers(1, caps.T + 1))
    prior = _simplex(gen, n_th)
    name = f"random-{seed}-{stream_id}-{kind}"
    if kind == "partial_feedback":
        return _random_pf(gen, caps, n_th, T, prior, name)
    S = int(gen.integers(1, caps.s + 1))
    A = int(gen.integers(1, caps.a + 1))
    Y = int(gen.integers(1, caps.y + 1))
    init = _simplex(gen, (n_th, S))
    reward = gen.choice(REWARD_GRID, size=(Y, A))
    if kind == "general":
        trans = _simplex(gen, (S, A, n_th, S))
        outcome = _simplex(gen, (S, n_th, Y))
    elif kind == "static":
        trans = np.broadcast_to(np.eye(S)[:, None, None, :], (S, A, n_th, S)).copy()
        outcome = np.broadcast_to(_simplex(gen, (n_th, Y)), (S, n_th, Y)).copy()
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    return EnvironmentSpec(prior=prior, initial_state=init, trans=trans, outcome=outcome,
                           reward=reward, horizon=T, name=name)


def _random_pf(gen, caps, n_th, T, prior, name):
    A = int(gen.integers(1, caps.a + 1))
    n_pf = int(gen.integers(2, max(caps.y, 2) + 1))
    preference = gen.choice(REWARD_GRID, size=n_pf, replace=False)
    Y = n_pf**A
    full_reveal = bool(gen.integers(2))
    if full_reveal:
        # support on vectors (pi_0(k), ..., pi_{A-1}(k)): each coordinate pins down k
        perms = np.stack([gen.permutation(n_pf) for _ in range(A)], axis=1)  # (K, A)
        support = np.ravel_multi_index(tuple(perms.T), (n_pf,) * A)
        outcome = np.zeros((n_th, Y))
        outcome[:, support] = _simplex(gen, (n_th, n_pf))
    else:
        outcome = _simplex(gen, (n_th, Y))
    return partial_feedback(outcome, preference, T, prior, full_reveal=full_reveal, name=name)


def random_knowledge_kernel(spec: EnvironmentSpec, gen: np.random.Generator, max_size: int = 2) -> KnowledgeKernelSpec:
    """Random channel, or occasionally the full-history kernel."""
    if gen.random() < 0.2:
        return history_knowledge(spec)
    X = int(gen.integers(1, max_size + 1))
    shape = (spec.n_states, spec.n_actions, spec.n_outcomes, spec.n_params, X)
    return KnowledgeKernelSpec(X, _simplex(gen, shape), initial=_simplex(gen, (spec.n_params, X)))


def random_processing_kernel(know: KnowledgeKernelSpec, horizon: int, gen: np.random.Generator,
                             max_size: int = 2) -> ProcessingKernelSpec:
    Z = int(gen.integers(1, max_size + 1))
    X = know.knowledge_space_size
    return ProcessingKernelSpec(Z, [_simplex(gen, (X**t, Z)) for t in range(1, horizon + 1)])
