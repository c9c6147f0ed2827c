"""Entropy, divergences, mutual information and Wasserstein-1 on finite spaces (nats)."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .errors import InvalidDistribution, NegativeKL, SupportMismatch
from .probability import FiniteDistribution, JointTable

# POT probes every array backend it knows at import; the CPU numpy one is all we use.
for _backend in ("PYTORCH", "TENSORFLOW", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_backend}", "1")
import ot  # noqa: E402

METRIC_TOL = 1e-12
COUPLING_TOL = 1e-9


@total_ordering
class _InfiniteKL:
    """Value of a divergence whose first argument is not absolutely continuous.

    Orders above every real number and converts with ``float()`` to ``inf``,
    but deliberately supports no arithmetic.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE_KL"

    def __float__(self):
        return float("inf")

    def __eq__(self, other):
        return other is self or (isinstance(other, float) and other == float("inf"))

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash(float("inf"))


INFINITE_KL = _InfiniteKL()


def is_infinite(value) -> bool:
    return value is INFINITE_KL or (isinstance(value, (float, np.floating)) and np.isinf(value))


def kl_terms(p, q) -> np.ndarray:
    """Elementwise ``p log(p/q) - p + q``: non-negative, inf where ``p > 0 = q``.

    Near ``p = q`` it is written as ``q * ((1 + u) log1p(u) - u)`` with
    ``u = p/q - 1`` so that entries equal up to rounding contribute ``~u**2``
    rather than ``~u``; elsewhere logs are differenced so that tiny ``q`` cannot
    overflow the ratio.
    """
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    out = np.where(p > 0, np.inf, q)  # q = 0: inf unless p = 0; p = 0: term is q
    both = (p > 0) & (q > 0)
    pb, qb = p[both], q[both]
    near = np.abs(pb - qb) <= 0.5 * qb
    u = np.where(near, (pb - qb) / np.where(near, qb, 1.0), 0.0)
    close = qb * ((1.0 + u) * np.log1p(u) - u)
    far = pb * (np.log(pb) - np.log(qb)) - pb + qb
    out[both] = np.maximum(np.where(near, close, far), 0.0)
    return out


def _weights(p) -> np.ndarray:
    return p.weights if isinstance(p, FiniteDistribution) else np.asarray(p, dtype=float)


def _pair(p, q):
    p, q = _weights(p), _weights(q)
    if p.shape != q.shape:
        raise SupportMismatch(f"support sizes {p.shape} and {q.shape} differ")
    return p, q


def entropy(p) -> float:
    p = _weights(p)
    nz = p[p > 0]
    return max(float(-(nz * np.log(nz)).sum()), 0.0)


def kl(p, q):
    """Relative entropy ``D(p || q)``; :data:`INFINITE_KL` when ``p`` is not dominated by ``q``."""
    p, q = _pair(p, q)
    if np.any(q[p > 0] <= 0):
        return INFINITE_KL
    return float(kl_terms(p, q).sum())


def tv(p, q) -> float:
    p, q = _pair(p, q)
    return float(0.5 * np.abs(p - q).sum())


def pinsker_bh_bound(kl_value) -> float:
    """Smaller of the Pinsker and Bretagnolle-Huber bounds on total variation."""
    if is_infinite(kl_value):
        return 1.0
    if kl_value < 0:
        raise NegativeKL(f"divergence {kl_value!r} is negative")
    return float(min(np.sqrt(kl_value / 2), np.sqrt(-np.expm1(-kl_value))))


def mutual_information(joint) -> float:
    arr = joint.array if isinstance(joint, JointTable) else np.asarray(joint, dtype=float)
    if arr.ndim != 2:
        raise InvalidDistribution("mutual information needs a two-variable table")
    prod = np.outer(arr.sum(axis=1), arr.sum(axis=0))
    return float(kl_terms(arr, prod).sum())


def conditional_mutual_information(joint) -> float:
    """``I(X; Y | Z)`` for a table over ``(X, Y, Z)``; zero-mass slices contribute nothing."""
    arr = joint.array if isinstance(joint, JointTable) else np.asarray(joint, dtype=float)
    if arr.ndim != 3:
        raise InvalidDistribution("conditional mutual information needs a three-variable table")
    total = 0.0
    for z in range(arr.shape[2]):
        slab = arr[:, :, z]
        mass = slab.sum()
        if mass > 0:
            total += mass * mutual_information(slab / mass)
    return total


# vectorised helpers over stacked rows (inf marks a divergence that blows up)

def kl_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    P, Q = np.broadcast_arrays(np.asarray(P, float), np.asarray(Q, float))
    return kl_terms(P, Q).sum(axis=-1)


def tv_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs(np.asarray(P) - np.asarray(Q)).sum(axis=-1)


def mi_from_joint_rows(J: np.ndarray) -> np.ndarray:
    """Mutual information of each stacked 2-d table ``J[..., x, y]`` (tables need not be normalised).

    Returned values are ``mass * I`` so that summing over cells gives a
    conditional mutual information directly.
    """
    J = np.asarray(J, float)
    mass = J.sum(axis=(-2, -1), keepdims=True)
    prod = J.sum(axis=-1, keepdims=True) * J.sum(axis=-2, keepdims=True)
    prod = np.divide(prod, mass, out=np.zeros_like(prod), where=mass > 0)
    return kl_terms(J, prod).sum(axis=(-2, -1))


# transport

@dataclass(frozen=True)
class FiniteMetric:
    n_points: int
    dist: np.ndarray

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        n = int(self.n_points)
        if d.shape != (n, n):
            raise InvalidDistribution(f"metric matrix must be {n}x{n}")
        problems = []
        if np.any(d < 0):
            problems.append("negative distance")
        if np.any(np.abs(np.diag(d)) > METRIC_TOL):
            problems.append("non-zero diagonal")
        if np.any(np.abs(d - d.T) > METRIC_TOL):
            problems.append("asymmetric")
        # d[i, k] <= d[i, j] + d[j, k] for every triple
        if n and np.any(d[:, None, :] > d[:, :, None] + d[None, :, :] + METRIC_TOL):
            problems.append("triangle inequality fails")
        if problems:
            raise InvalidDistribution("not a metric: " + ", ".join(problems))
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    @classmethod
    def discrete(cls, n: int) -> "FiniteMetric":
        return cls(n, 1.0 - np.eye(n))

    @classmethod
    def line(cls, points) -> "FiniteMetric":
        x = np.asarray(points, dtype=float)
        return cls(len(x), np.abs(x[:, None] - x[None, :]))

    @classmethod
    def product(cls, first: "FiniteMetric", second: "FiniteMetric") -> "FiniteMetric":
        """Sum metric on pairs, pair ``(i, j)`` at index ``i * second.n_points + j``."""
        d = first.dist[:, None, :, None] + second.dist[None, :, None, :]
        n = first.n_points * second.n_points
        return cls(n, d.reshape(n, n))


@dataclass(frozen=True)
class Coupling:
    matrix: np.ndarray

    def check(self, p, q, tol: float = COUPLING_TOL) -> bool:
        m = self.matrix
        return bool(
            np.all(m >= -tol)
            and np.allclose(m.sum(axis=1), _weights(p), atol=tol, rtol=0)
            and np.allclose(m.sum(axis=0), _weights(q), atol=tol, rtol=0)
        )


def wasserstein1(p, q, metric: FiniteMetric):
    """Exact optimal transport cost and an optimal coupling (network simplex)."""
    p, q = _pair(p, q)
    if p.size != metric.n_points:
        raise SupportMismatch(f"metric has {metric.n_points} points, distributions have {p.size}")
    # the solver wants identical totals to machine precision
    p = p / p.sum()
    q = q / q.sum()
    plan = ot.emd(p, q, np.ascontiguousarray(metric.dist))
    return max(float((plan * metric.dist).sum()), 0.0), Coupling(plan)
