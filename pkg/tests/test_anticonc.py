import itertools
import math

import numpy as np
import pytest
from hypothesis import example, given, strategies as st
from scipy import stats

from hardnesslab.core.errors import BudgetError, HypothesisError, ParameterError, StructuralConditionError
from hardnesslab.models.block_vector import BlockVector
from hardnesslab.models.classifier import Halfspace
from hardnesslab.services import anticonc


def brute_small_ball(a, theta, radius):
    hits = sum(abs(sum(c * x for c, x in zip(a, xs)) + theta) <= radius for xs in itertools.product((0, 1), repeat=len(a)))
    return hits / 2 ** len(a)


def test_exact_small_ball_matches_the_binomial():
    oracle = sum(stats.binom.pmf(s, 20, 0.5) for s in (9, 10, 11))
    assert anticonc.lo_exact(np.ones(20), -10.0, 1.0) == pytest.approx(oracle, abs=1e-12)


@given(
    st.lists(st.integers(-6, 6), min_size=1, max_size=10),
    st.integers(-20, 20),
    st.integers(0, 4),
)
@example([1, 1, 1], -1, 0)
def test_exact_small_ball_matches_enumeration(a, theta, radius):
    assert anticonc.lo_exact(a, theta, radius) == brute_small_ball(a, theta, radius)


def test_exact_small_ball_budget():
    with pytest.raises(BudgetError):
        anticonc.lo_exact(np.ones(31), 0.0, 1.0)
    with pytest.raises(ParameterError):
        anticonc.lo_exact(np.ones(3), 0.0, -1.0)


def test_supremum_over_theta():
    prob, theta = anticonc.lo_exact_sup(np.ones(10), 1.0)
    assert prob == pytest.approx((210 + 252 + 210) / 1024)
    assert prob == pytest.approx(anticonc.central_mass(10, 1.0))
    assert anticonc.lo_exact(np.ones(10), theta, 1.0) == pytest.approx(prob)
    with pytest.raises(BudgetError):
        anticonc.lo_exact_sup(np.ones(23), 1.0)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=8), st.integers(-10, 10))
def test_supremum_dominates_every_shift(a, theta):
    prob, _ = anticonc.lo_exact_sup(a, 1.0)
    assert anticonc.lo_exact(a, theta, 1.0) <= prob + 1e-12


def test_unit_coefficient_decay_exponent():
    result = anticonc.lo_scaling_check((16, 64, 256, 1024))
    assert result.passed
    assert -0.6 <= result.estimate <= -0.4


@pytest.mark.slow
def test_mixed_coefficients_stay_under_the_fitted_envelope():
    result = anticonc.lo_scaling_check((16, 64, 256), trials=20_000, seed=1)
    assert result.passed
    assert len(result.details["mixed"]) == 3


def test_block_small_ball_rejects_bad_input():
    with pytest.raises(ParameterError):
        anticonc.block_lo_mc([[1.0], [2.0]], 100, seed=0)
    with pytest.raises(ParameterError):
        anticonc.block_lo_mc([[1.0]], 1, seed=0)


def test_lattice_blocks_hit_the_binomial_mode():
    result = anticonc.block_lo_mc(anticonc.lattice_blocks(16, 4), 20_000, seed=0)
    mode = math.comb(16, 8) / 2**16
    assert result.estimate == pytest.approx(mode, abs=0.03)
    assert result.details["radius"] == pytest.approx(0.25)
    assert result.passed


@pytest.mark.slow
def test_block_small_ball_decays_like_inverse_root():
    result = anticonc.block_lo_scaling((16, 64, 256), 4, 20_000, seed=0)
    assert result.passed


def test_berry_esseen_single_sign():
    result = anticonc.berry_esseen_gap([(-1.0, 0.5), (1.0, 0.5)], 1)
    assert result.estimate == pytest.approx(stats.norm.cdf(1.0) - 0.5, abs=1e-12)
    assert result.details["method"] == "exact"


def test_berry_esseen_gap_shrinks_and_respects_the_bound():
    rows = [anticonc.berry_esseen_gap([(-1.0, 0.5), (1.0, 0.5)], n) for n in (4, 16, 64)]
    gaps = [r.estimate for r in rows]
    assert gaps == sorted(gaps, reverse=True)
    assert all(r.passed for r in rows)
    assert rows[0].details["gamma"] == pytest.approx(0.5)


def test_berry_esseen_falls_back_to_sampling(monkeypatch):
    exact = anticonc.berry_esseen_gap([(-1.0, 0.5), (1.0, 0.5)], 16).estimate
    monkeypatch.setattr(anticonc, "MAX_DP_ATOMS", 3)
    sampled = anticonc.berry_esseen_gap([(-1.0, 0.5), (1.0, 0.5)], 16, trials=20_000, seed=2)
    assert sampled.details["method"] == "empirical"
    assert sampled.estimate == pytest.approx(exact, abs=0.03)


def test_berry_esseen_validates_atoms():
    with pytest.raises(ParameterError):
        anticonc.berry_esseen_gap([(0.0, 0.5), (1.0, 0.4)], 4)
    with pytest.raises(ParameterError):
        anticonc.berry_esseen_gap([(1.0, 1.0)], 4)


@pytest.mark.parametrize("side, alpha", [("X", 0.25 * 0.25), ("Y", 0.25 * 0.75)])
def test_single_block_shortfall_is_one_minus_alpha(bijective, matched_params, side, alpha):
    instance, _ = bijective
    edge = instance.edges[0]
    v = edge.ex[0] if side == "X" else edge.ey[0]
    trials = 4000
    result = anticonc.noisy_mass_concentration(
        instance, 0, matched_params, {v: BlockVector({3: np.array([1.0])})}, trials, seed=0
    )
    expected = 1 - alpha
    assert result.details["per_vertex"][v]["alpha"] == pytest.approx(alpha)
    assert abs(result.estimate - expected) <= 5 * math.sqrt(expected * alpha / trials)


def test_noisy_mass_rejects_foreign_vertices(bijective, matched_params):
    instance, _ = bijective
    outside = next(v for v in range(instance.num_vertices) if not instance.edges[0].contains(v))
    with pytest.raises(ParameterError):
        anticonc.noisy_mass_concentration(instance, 0, matched_params, {outside: BlockVector({})}, 10, seed=0)


def _flat(instance, params):
    edge = instance.edges[0]
    cx = {(v, i, q): 1 for v in edge.ex for i in range(instance.M) for q in range(params.Q)}
    cy = {(v, i, q): 1 for v in edge.ey for i in range(instance.M) for q in range(params.Q)}
    return Halfspace(cx, cy, -40)


def test_variance_of_the_coupled_difference(bijective, matched_params):
    instance, _ = bijective
    h = _flat(instance, matched_params)
    result = anticonc.variance_diff_mc(instance, 0, matched_params, h, 400, seed=0)
    assert result.passed
    assert result.details["reg_mass"] == pytest.approx(2 * 8 * 16 * 4)
    assert result.bound == pytest.approx(2 * result.details["reg_mass"] / 2)
    assert result.details["mean_zero"]


def test_pointwise_deviation_runs_on_a_regular_edge(bijective, matched_params):
    instance, _ = bijective
    result = anticonc.pointwise_deviation_mc(instance, 0, matched_params, _flat(instance, matched_params), 200, seed=0)
    assert result.bound == pytest.approx(anticonc.deviation_bound(matched_params))
    assert result.bound_vacuous
    assert result.passed


def test_pointwise_deviation_refuses_when_a_condition_fires(bijective, matched_params):
    instance, _ = bijective
    edge = instance.edges[0]
    u, v = edge.ex[0], edge.ey[0]
    label_v = edge.preimage(v, edge.project(u, 0))[0]
    h = Halfspace({(u, 0, 0): 1}, {(v, label_v, 0): 1})
    with pytest.raises(StructuralConditionError):
        anticonc.pointwise_deviation_mc(instance, 0, matched_params, h, 10, seed=0)


def test_coupled_checks_need_a_truncated_halfspace(bijective, matched_params):
    instance, _ = bijective
    v = instance.edges[0].ex[0]
    h = Halfspace({(v, 0, 0): 100, (v, 1, 0): 50, (v, 2, 0): 1, (v, 3, 0): 1}, {})
    with pytest.raises(HypothesisError):
        anticonc.variance_diff_mc(instance, 0, matched_params.override(K=1), h, 10, seed=0)
