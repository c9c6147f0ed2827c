"""Finite distributions, joint tables and seeded sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AllZero, BadIndex, InvalidDistribution, NegativeMass, ZeroConditioningMass

MASS_TOL = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_mass(weights: np.ndarray) -> None:
    if not np.all(np.isfinite(weights)):
        raise InvalidDistribution("weights must be finite")
    if np.any(weights < 0):
        raise NegativeMass("weights must be non-negative")
    total = float(weights.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise InvalidDistribution(f"weights sum to {total!r}, not 1")


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability vector over the indexed support ``0 .. support_size - 1``."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise InvalidDistribution("weights must be a non-empty vector")
        _check_mass(w)
        object.__setattr__(self, "weights", w)

    @property
    def support_size(self) -> int:
        return int(self.weights.size)

    def __len__(self) -> int:
        return self.support_size

    def __getitem__(self, i):
        return float(self.weights[i])

    def __eq__(self, other):
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    @classmethod
    def point_mass(cls, n: int, i: int) -> "FiniteDistribution":
        w = np.zeros(n)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, n: int) -> "FiniteDistribution":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class JointTable:
    """Joint law over several finite variables, stored flat in C order."""

    dims: tuple
    weights: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d <= 0 for d in dims):
            raise InvalidDistribution("dims must be positive integers")
        w = _frozen(np.asarray(self.weights, dtype=float).ravel())
        if w.size != int(np.prod(dims)):
            raise InvalidDistribution(f"{w.size} weights do not fill dims {dims}")
        _check_mass(w)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_array(cls, table) -> "JointTable":
        arr = np.asarray(table, dtype=float)
        return cls(arr.shape, arr.ravel())

    @property
    def array(self) -> np.ndarray:
        return self.weights.reshape(self.dims)

    @property
    def n_vars(self) -> int:
        return len(self.dims)

    def to_distribution(self) -> FiniteDistribution:
        if self.n_vars != 1:
            raise BadIndex("only a one-variable table is a FiniteDistribution")
        return FiniteDistribution(self.weights)


def normalize(raw: Sequence[float]) -> FiniteDistribution:
    """Scale a non-negative vector to unit mass."""
    arr = np.asarray(raw, dtype=float)
    if np.any(arr < 0):
        raise NegativeMass("cannot normalize a vector with negative entries")
    total = arr.sum()
    if total <= 0:
        raise AllZero("cannot normalize an all-zero vector")
    out = arr / total
    # one renormalisation pass absorbs the rounding of the division
    out = out / out.sum()
    return FiniteDistribution(out)


def marginalize(joint: JointTable, keep: Iterable[int]) -> JointTable:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise BadIndex("keep must name at least one variable")
    for k in keep:
        if not 0 <= k < joint.n_vars:
            raise BadIndex(f"variable {k} not in a {joint.n_vars}-variable table")
    drop = tuple(i for i in range(joint.n_vars) if i not in keep)
    arr = joint.array.sum(axis=drop) if drop else joint.array
    return JointTable.from_array(arr)


def condition(joint: JointTable, given: int, value: int) -> JointTable:
    """Law of the remaining variables given ``variable[given] == value``."""
    if not 0 <= given < joint.n_vars or joint.n_vars < 2:
        raise BadIndex(f"cannot condition variable {given} of a {joint.n_vars}-variable table")
    if not 0 <= value < joint.dims[given]:
        raise BadIndex(f"value {value} outside support of variable {given}")
    slab = np.take(joint.array, value, axis=given)
    mass = slab.sum()
    if mass <= 0:
        raise ZeroConditioningMass(f"P(X{given} = {value}) is zero")
    return JointTable.from_array(slab / mass)


@dataclass
class RandomSource:
    """Seeded stream of uniforms; ``(seed, stream_id)`` fixes the sequence."""

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def random(self, size=None):
        return self.generator.random(size)

    def spawn(self, stream_id: int) -> "RandomSource":
        return RandomSource(self.seed, stream_id)


def sample(dist: FiniteDistribution, rng: RandomSource) -> int:
    """Inverse-CDF draw over the stored weight order."""
    cdf = np.cumsum(dist.weights)
    u = rng.random()
    i = int(np.searchsorted(cdf, u, side="right"))
    # guard against cdf[-1] landing a hair below 1
    i = min(i, dist.support_size - 1)
    while dist.weights[i] == 0:
        i -= 1
    return i


def sample_rows(cdfs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorised inverse-CDF: row ``k`` of ``cdfs`` sampled with uniform ``u[k]``."""
    idx = (cdfs <= u[:, None]).sum(axis=1)
    return np.minimum(idx, cdfs.shape[1] - 1)
