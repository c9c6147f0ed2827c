from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from mbr.environment import EnvironmentSpec, bernoulli_bandit  # noqa: E402
from mbr.generate import SizeCaps, generate_random_instance  # noqa: E402
from mbr.instance_io import load_canonical  # noqa: E402

# filled by test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def bandit():
    return bernoulli_bandit(np.array([[0.9, 0.1], [0.1, 0.9]]), [0.5, 0.5], 2, name="bernoulli2x2")


@pytest.fixture
def chain():
    return load_canonical("chain-mdp")[0]


def point_mass(spec: EnvironmentSpec, theta: int = 0) -> EnvironmentSpec:
    prior = np.zeros(spec.n_params)
    prior[theta] = 1.0
    return spec.with_prior(prior)


def small_instances(caps: SizeCaps, kind=None, max_stream: int = 10_000):
    """Hypothesis strategy over seeded random instances."""
    return st.integers(0, max_stream).map(lambda i: generate_random_instance(1234, caps, stream_id=i, kind=kind))
