import numpy as np
import pytest

from hardnesslab.core.errors import ParameterError
from hardnesslab.core.rng import point_rng
from hardnesslab.models.classifier import Halfspace
from hardnesslab.services import classify, decode
from tests.conftest import single_edge_instance


def test_decoding_bound_formula():
    assert decode.decoding_bound(0.1, 2, 0.5, 4) == pytest.approx((0.1 / 4) * (1 / 64) * min(1 / 16, 0.0625 / 4))


def test_plan_splits_top_and_residual_labels():
    instance = single_edge_instance([(0, 1, 2, 3), (0, 1, 2, 3)])
    h = Halfspace({(0, 0, 0): 100, (0, 1, 0): 1, (0, 2, 0): 1, (0, 3, 0): 2}, {(0, 3, 0): 5})
    plan = decode.labeling_plan(instance, [h], 0.5, 4)[0][0]
    assert plan.top == (0, 3)
    assert set(plan.residual_x.labels.tolist()) == {1, 2}
    assert plan.residual_y.empty
    assert decode.labeling_plan(instance, [h], 0.5, 4)[0][1].top == ()


def test_residual_pick_is_proportional_to_mass():
    residual = decode.Residual(np.array([4, 7]), np.cumsum([1.0, 3.0]))
    assert residual.pick(0.0) == 4
    assert residual.pick(0.2) == 4
    assert residual.pick(0.3) == 7
    assert residual.pick(0.999) == 7


def test_labels_stay_in_range(planted):
    instance, labeling = planted
    h = classify.dictator_halfspace(labeling)
    for seed in range(10):
        sampled = decode.randomized_labeling(instance, [h], 0.1, 4, point_rng(seed, 0))
        assert len(sampled) == instance.num_vertices
        assert all(0 <= label < instance.M for label in sampled.assignment)


def test_dictator_decodes_to_a_good_labeling(planted):
    instance, labeling = planted
    result = decode.decode_and_score(instance, [classify.dictator_halfspace(labeling)], 0.1, 4, 300, seed=0)
    assert result.details["best_weak_frac"] >= 0.9
    assert 0.0 <= result.details["baseline"]["mean_weak_frac"] <= 1.0
    assert result.passed


def test_decoding_is_reproducible(planted):
    instance, labeling = planted
    h = classify.dictator_halfspace(labeling)
    first = decode.decode_and_score(instance, [h], 0.1, 4, 20, seed=9, baseline=False)
    second = decode.decode_and_score(instance, [h], 0.1, 4, 20, seed=9, baseline=False)
    assert first.model_dump() == second.model_dump()
    assert "baseline" not in first.details


def test_decoding_rejects_empty_input(planted):
    instance, labeling = planted
    with pytest.raises(ParameterError):
        decode.decode_and_score(instance, [classify.dictator_halfspace(labeling)], 0.1, 4, 0, seed=0)
    with pytest.raises(ParameterError):
        decode.labeling_plan(instance, [], 0.1, 4)


def test_edge_success_under_condition_one():
    instance = single_edge_instance([(0, 1, 2, 3), (0, 1, 2, 3)])
    h = Halfspace({(0, 0, 0): 1}, {(1, 0, 0): 1})
    result = decode.edge_success_mc(instance, 0, [h], 0.5, 4, 2000, seed=0)
    assert tuple(result.details["condition_I"]) == (0, 1, 0, 0, 0)
    assert result.bound == pytest.approx(1 / (16 * 16))
    assert result.estimate >= 0.25 - 0.05
    assert result.passed


def test_edge_success_without_conditions_has_no_bound():
    instance = single_edge_instance([(0, 1, 2, 3), (0, 1, 2, 3)])
    flat = {(v, i, 0): 1 for v in (0, 1) for i in range(4)}
    result = decode.edge_success_mc(instance, 0, [Halfspace(flat, flat)], 0.5, 4, 100, seed=0)
    assert result.bound is None
    assert result.passed is None
