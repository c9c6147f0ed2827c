"""Exact minimum Bayesian regret for finite Bayesian MDPs, with information-theoretic bounds."""

from .environment import EnvironmentSpec, PartialFeedbackSpec, Record, bernoulli_bandit, partial_feedback, validate
from .errors import MBRError
from .probability import FiniteDistribution, JointTable, RandomSource

__version__ = "0.1.0"

__all__ = [
    "EnvironmentSpec",
    "FiniteDistribution",
    "JointTable",
    "MBRError",
    "PartialFeedbackSpec",
    "RandomSource",
    "Record",
    "bernoulli_bandit",
    "partial_feedback",
    "validate",
]
