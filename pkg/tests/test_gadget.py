import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from hardnesslab.core.config import settings
from hardnesslab.core.errors import CouplingError, NicenessError, ParameterError
from hardnesslab.core.rng import point_rng
from hardnesslab.schemas.params import GadgetParams
from hardnesslab.services import gadget
from hardnesslab.services.labelcover import build_planted_instance


def test_derived_parameters_follow_the_formulas():
    params = gadget.derive_params(0.25, 0.1, 1, 1)
    assert params.paper_faithful
    assert params.d == 4
    assert params.k % 2 == 0 and params.k >= 10 / (0.25 * 0.75) ** 2
    assert params.t == params.k // 4
    assert params.Q == 16 * params.d * params.k
    assert params.tau == pytest.approx((10 * params.k * math.log(params.Q)) ** -2)
    assert params.K == math.ceil((20 / params.tau) * math.log(params.Q / params.tau))
    assert params.marginals_matched


@pytest.mark.parametrize("zeta", [0.0, 0.5, -0.1, float("nan")])
def test_zeta_outside_the_open_interval_is_rejected(zeta):
    with pytest.raises(ParameterError):
        gadget.derive_params(zeta, 0.1, 1, 1)


def test_override_clears_the_faithful_flag():
    params = gadget.derive_params(0.25, 0.1, 1, 1).override(Q=8)
    assert params.Q == 8
    assert not params.paper_faithful


def test_params_shape_is_validated():
    with pytest.raises(ValidationError):
        GadgetParams(zeta=0.25, d=1, k=3, t=1, Q=4, tau=0.1, K=2)
    with pytest.raises(ValidationError):
        GadgetParams(zeta=0.25, d=1, k=2, t=3, Q=4, tau=0.1, K=2)


def test_infeasible_acceptance_needs_clamping(clamped_params):
    assert gadget.zero_point_acceptance(clamped_params) == 1.0
    with pytest.raises(ParameterError):
        gadget.zero_point_acceptance(clamped_params.override(clamp_acceptance=False))


def test_matched_acceptance(matched_params):
    assert gadget.zero_point_acceptance(matched_params) == pytest.approx(1 / (0.25 * 0.75 * 6))


@given(st.integers(0, 2**32))
def test_basic_test_support(seed):
    M, k = 12, 3
    point = gadget.sample_basic_I(M, k, point_rng(seed, 0))
    if point.a == 1:
        assert point.x == frozenset((0, i, 0) for i in range(M))
        rows = {v for v, _, _ in point.y}
        assert len(rows) == 1 and len(point.y) == M
    else:
        x_labels = {i for _, i, _ in point.x}
        y_labels = [i for _, i, _ in point.y]
        assert len(y_labels) == len(set(y_labels))
        assert x_labels.isdisjoint(y_labels)
        assert x_labels | set(y_labels) == set(range(M))


@given(st.integers(0, 2**32))
def test_simplified_one_points_carry_one_indicator_per_label(seed):
    m, d, k, Q = 3, 2, 4, 5
    point = gadget.sample_simplified_D(m, d, k, Q, point_rng(seed, 0))
    for block in point.transcript.blocks:
        assert len(block.S) == k // 2
        assert block.u_x in block.S and block.u_y in block.S
        if point.a == 1:
            for i in range(block.j * d, (block.j + 1) * d):
                assert sum(1 for v, l, _ in point.x if v == block.u_x and l == i) == 1


def test_simplified_rejects_odd_k():
    with pytest.raises(ParameterError):
        gadget.sample_simplified_D(2, 1, 3, 2, point_rng(0, 0))


@given(st.integers(0, 2**32))
def test_edge_points_have_the_block_structure(seed):
    instance, _ = build_planted_instance(16, 8, 2, 8, 4, 2, seed=0)
    params = GadgetParams(zeta=0.25, d=2, k=2, t=1, Q=8, tau=0.1, K=4, clamp_acceptance=True)
    point = gadget.sample_global(instance, params, point_rng(seed, 0))
    gadget.assert_point_structure(point, instance, params)
    edge = instance.edges[point.edge_id]
    for block in point.transcript.blocks:
        assert set(block.S) <= set(edge.ex) and set(block.S_prime) <= set(edge.ey)
        if point.a == 1:
            assert block.u_x in block.S and block.u_y in block.S_prime
        else:
            assert set(block.T) <= set(block.S) and set(block.T_prime) <= set(block.S_prime)
            assert not (block.T and block.T_prime)


def test_transcript_replays_the_point(planted, clamped_params):
    instance, _ = planted
    point = gadget.sample_global(instance, clamped_params, point_rng(4, 9))
    again = gadget.replay_point(instance, clamped_params, point.transcript)
    assert again.x == point.x and again.y == point.y and again.a == point.a


def test_draw_points_is_independent_of_chunking_and_workers(planted, clamped_params, monkeypatch):
    instance, _ = planted
    sampler = gadget.GlobalSampler(instance, clamped_params)
    reference = gadget.draw_points(sampler, 30, seed=5)
    monkeypatch.setattr(settings, "CHUNK_SIZE", 7)
    chunked = gadget.draw_points(sampler, 30, seed=5, workers=2)
    assert [(p.a, p.x, p.y) for p in reference] == [(p.a, p.x, p.y) for p in chunked]


def test_gate_frequency_matches_the_acceptance_probability(bijective, matched_params):
    instance, _ = bijective
    report = gadget.acceptance_report(instance, matched_params, 600, seed=1)
    tolerance = 5 * math.sqrt(report.gate_expected * (1 - report.gate_expected) / report.blocks)
    assert abs(report.gate_rate - report.gate_expected) <= tolerance
    tolerance = 5 * math.sqrt(report.any_bits_expected * (1 - report.any_bits_expected) / report.blocks)
    assert abs(report.any_bits_rate - report.any_bits_expected) <= tolerance


@pytest.mark.slow
def test_class_marginals_coincide_when_acceptance_is_feasible(matched_params):
    instance, _ = build_planted_instance(16, 1, 8, 4, 4, 1, seed=2)
    params = matched_params.override(Q=2)
    coordinates = gadget.edge_coordinates(instance, params)
    report = gadget.marginal_report(gadget.EdgeSampler(instance, params, 0), coordinates, 20_000, seed=3)
    assert len(report) == 16 * 4 * 2
    assert max(abs(m.z) for m in report) <= 5.0


def test_paired_points_share_structure(bijective, matched_params):
    instance, _ = bijective
    edge = instance.edges[0]
    zero, one = gadget.sample_paired(instance, 0, matched_params, {}, point_rng(0, 0))
    assert (zero.a, one.a) == (0, 1)
    for b0, b1 in zip(zero.transcript.blocks, one.transcript.blocks):
        assert b0.shared and b1.shared
        assert (b0.b, b0.S, b0.S_prime) == (b1.b, b1.S, b1.S_prime)
    for block in zero.transcript.blocks:
        if block.b != 0:
            continue
        cells = {(v, i) for v in edge.ex if v not in block.S for i in edge.preimage(v, block.j)}
        assert {b for b in zero.x if b[:2] in cells} == {b for b in one.x if b[:2] in cells}


def test_paired_one_point_keeps_its_indicator_law(bijective, matched_params):
    instance, _ = bijective
    edge = instance.edges[0]
    owner = edge.ex[0]
    tops = {owner: [frozenset({0})]}
    for seed in range(20):
        zero, one = gadget.sample_paired(instance, 0, matched_params, tops, point_rng(seed, 0))
        for block in one.transcript.blocks:
            assert block.u_x in block.S and block.u_y in block.S_prime
        for block in zero.transcript.blocks:
            assert set(block.T) <= set(block.S)


def test_paired_rejects_colliding_top_sets(bijective, matched_params):
    instance, _ = bijective
    edge = instance.edges[0]
    u, v = edge.ex[0], edge.ey[0]
    label_u = 0
    label_v = edge.preimage(v, edge.project(u, label_u))[0]
    with pytest.raises(CouplingError):
        gadget.sample_paired(instance, 0, matched_params, {u: [{label_u}], v: [{label_v}]}, point_rng(0, 0))


def test_paired_rejects_non_nice_top_sets(matched_params):
    instance, _ = build_planted_instance(16, 1, 8, 8, 4, 2, seed=0)
    edge = instance.edges[0]
    v = edge.vertices[0]
    j = next(j for j in range(instance.m) if len(edge.preimage(v, j)) == 2)
    params = matched_params.override(d=2)
    with pytest.raises(NicenessError):
        gadget.sample_paired(instance, 0, params, {v: [set(edge.preimage(v, j))]}, point_rng(0, 0))


def test_paired_needs_matched_marginals(planted, clamped_params):
    instance, _ = planted
    with pytest.raises(ParameterError):
        gadget.sample_paired(instance, 0, clamped_params, {}, point_rng(0, 0))


@pytest.mark.slow
def test_paired_zero_point_has_the_edge_law(bijective, matched_params):
    instance, _ = bijective
    edge = instance.edges[0]
    j = (edge.project(edge.ex[0], 0) + 1) % instance.m
    tops = {edge.ex[0]: [frozenset({0})], edge.ey[0]: [frozenset(edge.preimage(edge.ey[0], j))]}
    n = 3000
    paired = [
        len(gadget.sample_paired(instance, 0, matched_params, tops, point_rng(1, i))[0].x) for i in range(n)
    ]
    direct = [len(gadget.sample_edge(instance, matched_params, 0, 0, point_rng(2, i)).x) for i in range(n)]
    se = math.sqrt(np.var(paired, ddof=1) / n + np.var(direct, ddof=1) / n)
    assert abs(np.mean(paired) - np.mean(direct)) <= 5 * se
