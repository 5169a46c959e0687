import itertools

import pytest
from hypothesis import assume, given, strategies as st

from hardnesslab.core.errors import InfeasibleInstanceError, ParameterError
from hardnesslab.models.label_cover import LabelCoverInstance, Labeling
from hardnesslab.services import labelcover
from tests.conftest import single_edge_instance


def test_planted_instance_is_well_formed(planted):
    instance, labeling = planted
    assert instance.violations() == []
    assert instance.max_preimage_size() <= instance.d
    assert len(labeling) == instance.num_vertices


def test_planted_labeling_strongly_satisfies_every_edge(planted):
    instance, labeling = planted
    score = labelcover.evaluate_labeling(instance, labeling)
    assert score.strong_frac == 1.0
    assert score.weak_frac == 1.0


def test_generation_is_deterministic_in_the_seed():
    first, _ = labelcover.build_planted_instance(12, 5, 2, 6, 3, 2, seed=11)
    second, _ = labelcover.build_planted_instance(12, 5, 2, 6, 3, 2, seed=11)
    assert first == second
    assert labelcover.build_random_instance(12, 5, 2, 6, 3, 2, seed=1) == labelcover.build_random_instance(
        12, 5, 2, 6, 3, 2, seed=1
    )


@given(
    num_vertices=st.integers(4, 20),
    k=st.integers(1, 2),
    m=st.integers(1, 6),
    d=st.integers(1, 3),
    extra=st.integers(0, 12),
    seed=st.integers(0, 10_000),
)
def test_random_shapes_respect_the_preimage_bound(num_vertices, k, m, d, extra, seed):
    M = m + extra
    assume(M <= d * m and 2 * k <= num_vertices)
    instance = labelcover.build_random_instance(num_vertices, 3, k, M, m, d, seed)
    assert instance.violations() == []


def test_infeasible_shapes_are_rejected():
    with pytest.raises(InfeasibleInstanceError):
        labelcover.build_planted_instance(16, 4, 2, 9, 4, 2, seed=0)
    with pytest.raises(InfeasibleInstanceError):
        labelcover.build_random_instance(3, 4, 2, 4, 4, 1, seed=0)
    with pytest.raises(ParameterError):
        labelcover.build_random_instance(16, 4, 2, 3, 4, 1, seed=0)


def test_edge_satisfaction_distinguishes_strong_and_weak():
    instance = single_edge_instance([(0, 1, 2, 3), (0, 1, 2, 3)])
    edge = instance.edges[0]
    assert labelcover.edge_satisfaction(edge, Labeling((2, 2))) == (True, True)
    assert labelcover.edge_satisfaction(edge, Labeling((1, 2))) == (False, False)

    wide = single_edge_instance([tuple(range(4))] * 4, k=2)
    assert labelcover.edge_satisfaction(wide.edges[0], Labeling((0, 0, 1, 2))) == (False, True)


def test_labeling_must_be_total(planted):
    instance, _ = planted
    with pytest.raises(ParameterError):
        labelcover.evaluate_labeling(instance, Labeling((0,)))
    with pytest.raises(ValueError):
        Labeling.from_mapping({0: 1}, 2)


def test_violations_report_broken_projections():
    instance = single_edge_instance([(0, 0, 1, 1), (0, 1, 2, 3)], d=1)
    assert any("preimage" in p for p in instance.violations())


def test_smoothness_rates(planted):
    instance, _ = planted
    vertex = next(v for v in range(instance.num_vertices) if instance.incident_edges(v))
    pairs = list(itertools.combinations(range(instance.M), 2))
    report = labelcover.check_smoothness(instance, vertex, pairs)
    assert all(0.0 <= r <= 1.0 for r in report.pair_rates)
    assert report.edges_used == len(instance.incident_edges(vertex))
    assert labelcover.check_smoothness(instance, vertex, [(3, 3)]).max_rate == 1.0
    assert report.is_smooth(1.0)


def test_smoothness_needs_an_incident_edge():
    instance = single_edge_instance([(0, 1, 2, 3)] * 2)
    with pytest.raises(ParameterError):
        labelcover.check_smoothness(instance, 5, [(0, 1)])


def test_uniform_baseline(planted):
    instance, _ = planted
    baseline = labelcover.uniform_labeling_baseline(instance, 20, seed=0)
    assert 0.0 <= baseline["mean_weak_frac"] <= 1.0
    assert baseline["repeats"] == 20
    with pytest.raises(ParameterError):
        labelcover.uniform_labeling_baseline(instance, 0, seed=0)


def test_instance_without_edges_cannot_be_scored():
    empty = LabelCoverInstance(1, 2, 1, 2, 2, ())
    assert "instance has no edges" in empty.violations()
    with pytest.raises(ParameterError):
        labelcover.evaluate_labeling(empty, Labeling((0, 0)))
