from __future__ import annotations

import csv
import io
import json
import math

import numpy as np
import pytest
from conftest import point_mass, small_instances
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import kl_loop, mi_loop

from mbr.bounds import (
    BOUND_NAMES,
    CSV_COLUMNS,
    BoundConfig,
    ThompsonAnalysis,
    bound_cor1_kl_bounded,
    bound_cor2_wasserstein_bounded,
    bound_cor4_pf_kl,
    bound_cor5_entropy,
    bound_prop1_kl_subgaussian,
    bound_prop3_mab_wasserstein,
    bound_prop4_pf_wasserstein,
    bound_prop5_mab_subgaussian,
    bound_prop6_mab_wasserstein_lipschitz,
    bound_prop7_pf_subgaussian,
    bound_prop8_pf_wasserstein_lipschitz,
    evaluate_all,
    lipschitz_constant,
    remark7_entropy_dominance_check,
    reports_to_csv,
    wasserstein_ys_sum,
)
from mbr.environment import EnvironmentSpec, bernoulli_bandit
from mbr.errors import LipschitzViolated, NotApplicable, NotPartialFeedback, NotStatic, RewardRangeViolated
from mbr.generate import SizeCaps
from mbr.info import FiniteMetric
from mbr.instance_io import load_canonical

CAPS = SizeCaps(s=2, a=2, y=2, theta=3, T=2)


def _bern_kl(p, q):
    return kl_loop([p, 1 - p], [q, 1 - q])


# hand-computed values on the canonical bandit
# step 1: P(A* = a) = 1/2, each arm pays 0.9 given A* = a against 0.5 overall
# step 2: after one pull the posterior is (0.9, 0.1) up to relabelling; the
#   likely-optimal arm pays 0.9 against 0.82, the other 0.9 against 0.18

def test_bandit_tv_family_hand_value(bandit):
    an = ThompsonAnalysis(bandit)
    step1 = 0.4
    step2 = 0.9 * 0.08 + 0.1 * 0.72
    for fn in (bound_prop3_mab_wasserstein, bound_prop4_pf_wasserstein, bound_cor2_wasserstein_bounded):
        assert abs(fn(bandit, an) - (step1 + step2)) < 1e-12
    assert abs(an.thompson_regret - 0.544) < 1e-12


def test_bandit_kl_family_hand_value(bandit):
    an = ThompsonAnalysis(bandit)
    step1 = math.sqrt(_bern_kl(0.9, 0.5) / 2)
    step2 = 0.9 * math.sqrt(_bern_kl(0.9, 0.82) / 2) + 0.1 * math.sqrt(_bern_kl(0.9, 0.18) / 2)
    assert abs(bound_cor4_pf_kl(bandit, an) - (step1 + step2)) < 1e-12
    assert abs(bound_cor4_pf_kl(bandit, an) - 0.608297) < 1e-6


def test_bandit_entropy_bound_hand_value(bandit):
    general, full = bound_cor5_entropy(bandit)
    assert abs(general - math.sqrt(2 * math.log(2))) < 1e-12
    assert full is None


def test_bandit_information_sum_hand_value(bandit):
    lhs, rhs, holds = remark7_entropy_dominance_check(bandit)
    # I(A*; Y) with A* uniform and Y | A* ~ Bernoulli(0.9 or 0.1)
    step1 = mi_loop([[0.45, 0.05], [0.05, 0.45]])
    # after one pull: A* ~ (0.9, 0.1), either arm is Bernoulli(0.9) vs (0.1) given A*
    step2 = mi_loop([[0.9 * 0.9, 0.9 * 0.1], [0.1 * 0.1, 0.1 * 0.9]])
    assert abs(lhs - (step1 + step2)) < 1e-12
    assert abs(rhs - math.log(2)) < 1e-15 and holds


def test_bandit_report_is_sound(bandit):
    rep = evaluate_all(bandit)
    assert rep.ok, rep.failures
    assert abs(rep.mbr_exact - 0.48) < 1e-12
    assert [e.name for e in rep.entries] == list(BOUND_NAMES)
    assert not rep.entry("cor5_full_reveal").applicable


# structural properties

@settings(max_examples=40, deadline=None)
@given(small_instances(CAPS, kind="partial_feedback"))
def test_point_mass_prior_zeroes_the_divergence_bounds(spec):
    spec = point_mass(spec, 0)
    an = ThompsonAnalysis(spec)
    for fn in (bound_prop4_pf_wasserstein, bound_cor4_pf_kl, bound_prop3_mab_wasserstein, bound_cor1_kl_bounded):
        assert abs(fn(spec, an)) < 1e-12
    assert abs(remark7_entropy_dominance_check(spec, an)[0]) < 1e-12


@settings(max_examples=30, deadline=None)
@given(small_instances(CAPS, kind="partial_feedback"), st.floats(0.1, 10.0))
def test_subgaussian_bounds_scale_with_root_variance(spec, c):
    an = ThompsonAnalysis(spec)
    base = BoundConfig(sigma2_schedule=np.full(spec.horizon, 0.25))
    scaled = BoundConfig(sigma2_schedule=np.full(spec.horizon, 0.25 * c))
    for fn in (bound_prop1_kl_subgaussian, bound_prop5_mab_subgaussian, bound_prop7_pf_subgaussian):
        a, b = fn(spec, base, an), fn(spec, scaled, an)
        if math.isinf(a):
            assert math.isinf(b)
        else:
            assert math.isclose(b, math.sqrt(c) * a, rel_tol=1e-9, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(small_instances(CAPS, kind="partial_feedback"), st.floats(1.0, 5.0))
def test_lipschitz_bounds_scale_with_constant(spec, c):
    an = ThompsonAnalysis(spec)
    needed = lipschitz_constant(spec.preference, FiniteMetric.discrete(spec.n_pf_outcomes))
    a = bound_prop8_pf_wasserstein_lipschitz(spec, BoundConfig(lipschitz_L=needed), an)
    b = bound_prop8_pf_wasserstein_lipschitz(spec, BoundConfig(lipschitz_L=c * needed), an)
    assert math.isclose(b, c * a, rel_tol=1e-9, abs_tol=1e-12)
    if needed > 0:
        with pytest.raises(LipschitzViolated):
            bound_prop8_pf_wasserstein_lipschitz(spec, BoundConfig(lipschitz_L=0.5 * needed), an)


def test_too_small_lipschitz_constant_is_reported(bandit):
    rep = evaluate_all(bandit, BoundConfig(lipschitz_L=0.1))
    e = rep.entry("prop6_mab_wasserstein_lipschitz")
    assert not e.applicable and "needs L" in e.reason
    assert rep.ok


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_bounds_invariant_under_arm_relabelling(i):
    gen = np.random.default_rng(i)
    means = gen.random((3, 2))
    prior = gen.dirichlet(np.ones(2))
    perm = gen.permutation(3)
    a = evaluate_all(bernoulli_bandit(means, prior, 2))
    b = evaluate_all(bernoulli_bandit(means[perm], prior, 2))
    assert abs(a.mbr_exact - b.mbr_exact) < 1e-12
    assert abs(a.thompson_regret_exact - b.thompson_regret_exact) < 1e-12
    for name in BOUND_NAMES:
        va, vb = a.value(name), b.value(name)
        assert (va is None) == (vb is None)
        if va is not None:
            assert abs(va - vb) < 1e-9, name


def test_applicability_by_instance_class(chain):
    with pytest.raises(NotStatic):
        bound_prop3_mab_wasserstein(chain)
    with pytest.raises(NotPartialFeedback):
        bound_prop4_pf_wasserstein(chain)
    wide = EnvironmentSpec(prior=[1.0], initial_state=[[1.0]], trans=[[[[1.0]]]], outcome=[[[0.5, 0.5]]],
                           reward=[[0.0], [2.0]], horizon=1)
    with pytest.raises(RewardRangeViolated):
        bound_cor1_kl_bounded(wide)
    rep = evaluate_all(chain)
    assert rep.ok, rep.failures
    reasons = {e.name: e.reason for e in rep.entries if not e.applicable}
    assert "prop3_mab_wasserstein" in reasons and "static" in reasons["prop3_mab_wasserstein"]


def test_undefined_optimal_action_is_not_applicable():
    # static, but the best action differs between the two states
    spec = EnvironmentSpec(prior=[0.5, 0.5], initial_state=[[0.5, 0.5], [0.5, 0.5]],
                           trans=np.broadcast_to(np.eye(2)[:, None, None, :], (2, 2, 2, 2)).copy(),
                           outcome=np.array([[[1.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]]),
                           reward=[[1.0, 0.0], [0.0, 1.0]], horizon=1)
    assert spec.is_static
    with pytest.raises(NotApplicable, match="undefined"):
        bound_prop3_mab_wasserstein(spec)


@settings(max_examples=40, deadline=None)
@given(small_instances(SizeCaps(s=2, a=2, y=2, theta=3, T=2)))
def test_discrete_transport_sum_equals_total_variation(spec):
    an = ThompsonAnalysis(spec)
    if spec.reward.min() < 0 or spec.reward.max() > 1:
        return
    assert abs(wasserstein_ys_sum(spec, an) - bound_cor2_wasserstein_bounded(spec, an)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(small_instances(SizeCaps()))
def test_every_report_is_sound(spec):
    rep = evaluate_all(spec)
    assert rep.ok, rep.failures
    assert rep.mbr_exact >= -1e-10


def test_prop6_uses_derived_lipschitz_constant(bandit):
    an = ThompsonAnalysis(bandit)
    # rewards are coordinates of bit vectors: under the discrete metric L = 1
    assert abs(bound_prop6_mab_wasserstein_lipschitz(bandit, BoundConfig(), an) - 0.544) < 1e-12


# serialisation

def test_json_and_csv_round_trip(chain):
    rep = evaluate_all(chain, instance_id="chain-mdp")
    doc = json.loads(rep.to_json())
    assert doc["instance_id"] == "chain-mdp" and doc["schema_version"] == 1
    values = {e["bound_name"]: e["value"] for e in doc["entries"]}
    assert values["prop1_kl_subgaussian"] == "inf"  # vacuous, written as a string
    rows = list(csv.reader(io.StringIO(reports_to_csv([rep]))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + len(BOUND_NAMES)
    assert {r[1] for r in rows[1:]} == set(BOUND_NAMES)


def test_chain_instance_against_oracles(chain):
    from oracles import known_theta_brute_force, thompson_value_recursive

    an = ThompsonAnalysis(chain)
    assert abs(an.fundamental_limit - known_theta_brute_force(chain)) < 1e-12
    assert abs(an.thompson_value - thompson_value_recursive(chain, an.psi)) < 1e-12
    assert an.bcr <= an.fundamental_limit and an.thompson_value <= an.bcr
    assert load_canonical("chain-mdp")[0].horizon == 3
