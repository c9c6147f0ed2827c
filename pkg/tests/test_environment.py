from __future__ import annotations

import numpy as np
import pytest

from mbr.environment import (
    EnvironmentSpec,
    bernoulli_bandit,
    check,
    partial_feedback,
    reward_certificate,
    simulate_episode,
    validate,
)
from mbr.errors import MeanOutOfRange, ValidationError
from mbr.planning import optimal_policy_known_theta
from mbr.probability import RandomSource


def _two_state(**overrides):
    base = dict(
        prior=[0.5, 0.5],
        initial_state=[[1.0, 0.0], [1.0, 0.0]],
        trans=np.full((2, 2, 2, 2), 0.5),
        outcome=np.full((2, 2, 2), 0.5),
        reward=[[0.0, 1.0], [1.0, 0.0]],
        horizon=2,
    )
    base.update(overrides)
    return EnvironmentSpec(**base)


def test_valid_spec_has_no_violations():
    assert validate(_two_state()) == []


def test_validate_names_the_bad_kernel_row():
    trans = np.full((2, 2, 2, 2), 0.5)
    trans[1, 0, 1] = [0.7, 0.7]
    problems = validate(_two_state(trans=trans))
    assert len(problems) == 1 and problems[0].startswith("trans(1,0,1)")
    with pytest.raises(ValidationError) as exc:
        check(_two_state(trans=trans))
    assert "trans(1,0,1)" in exc.value.violations[0]


def test_shape_mismatch_is_rejected():
    with pytest.raises(ValidationError):
        _two_state(outcome=np.full((2, 2, 3), 1 / 3))
    with pytest.raises(ValidationError):
        _two_state(horizon=0)


def test_bernoulli_bandit_layout(bandit):
    assert (bandit.n_states, bandit.n_actions, bandit.n_params, bandit.n_outcomes) == (1, 2, 2, 4)
    assert bandit.is_static
    # expected reward of arm a under theta is the mean
    assert np.allclose(bandit.expected_reward[0], [[0.9, 0.1], [0.1, 0.9]])
    assert np.allclose(bandit.reward_likelihood.sum(axis=3), 1.0)
    assert check(bandit) is bandit


def test_bernoulli_bandit_rejects_bad_means():
    with pytest.raises(MeanOutOfRange):
        bernoulli_bandit([[1.2, 0.1]], [0.5, 0.5], 1)


def test_partial_feedback_checks():
    outcome = np.full((2, 4), 0.25)
    with pytest.raises(ValidationError, match="injective"):
        partial_feedback(outcome, [0.5, 0.5], 1, [0.5, 0.5])
    # every outcome vector has positive mass, so one coordinate cannot reveal it
    with pytest.raises(ValidationError, match="full_reveal"):
        partial_feedback(outcome, [0.0, 1.0], 1, [0.5, 0.5], full_reveal=True)
    diag = np.array([[0.5, 0.0, 0.0, 0.5], [0.2, 0.0, 0.0, 0.8]])
    pf = partial_feedback(diag, [0.0, 1.0], 1, [0.5, 0.5], full_reveal=True)
    assert pf.full_reveal and pf.is_static
    assert np.allclose(pf.projection.sum(axis=2), 1.0)


def test_reward_certificate_uses_hoeffding():
    cert = reward_certificate(_two_state(reward=[[-1.0, 1.0], [0.0, 0.0]]))
    assert (cert.lo, cert.hi, cert.sub_gaussian_sigma2) == (-1.0, 1.0, 1.0)


def test_with_horizon_and_prior_copy(bandit):
    longer = bandit.with_horizon(4)
    assert longer.horizon == 4 and bandit.horizon == 2
    assert np.array_equal(longer.outcome, bandit.outcome)
    tilted = bandit.with_prior([0.9, 0.1])
    assert tilted.prior.tolist() == [0.9, 0.1]


def test_simulate_episode_known_parameter(bandit):
    table, _ = optimal_policy_known_theta(bandit)
    rng = RandomSource(11)
    totals = [simulate_episode(bandit, table, 0, rng)[1] for _ in range(4000)]
    records, _ = simulate_episode(bandit, table, 1, rng)
    assert len(records) == 2 and all(r.action == 1 for r in records)
    # arm 0 under theta 0 pays 0.9 per step
    assert abs(np.mean(totals) - 1.8) < 4 * np.sqrt(2 * 0.09 / 4000)
