import pytest

from hardnesslab.core.errors import BudgetError, ParameterError
from hardnesslab.models.classifier import ConstantClassifier, Halfspace
from hardnesslab.models.point import SamplePoint
from hardnesslab.services import gadget, probe


def _separable_points(n=60):
    points = []
    for i in range(n):
        a = i % 2
        x = {(0, 1, i % 3), (1, 2, 0)}
        if a:
            x.add((0, 0, 0))
        points.append(SamplePoint(a, frozenset(x), frozenset({(2, i % 4, 0)})))
    return points


def test_dataset_indexes_every_observed_coordinate():
    dataset = probe.Dataset.from_points(_separable_points())
    assert ("X", 0, 0, 0) in dataset.feature_index
    assert len(dataset.rows) == len(dataset) == 60
    assert dataset.features == sorted(dataset.feature_index)


@pytest.mark.parametrize("method", ["perceptron", "logistic_sgd"])
def test_training_fits_separable_data(method):
    points = _separable_points()
    h = probe.train_halfspace(probe.Dataset.from_points(points), method, epochs=30, seed=1, learning_rate=0.5)
    assert probe.dataset_accuracy(h, points) == 1.0


def test_training_is_deterministic_in_the_seed():
    dataset = probe.Dataset.from_points(_separable_points())
    assert probe.train_halfspace(dataset, seed=4) == probe.train_halfspace(dataset, seed=4)


def test_training_rejects_bad_input():
    with pytest.raises(ParameterError):
        probe.train_halfspace(probe.Dataset.from_points([]))
    with pytest.raises(ParameterError):
        probe.train_halfspace(probe.Dataset.from_points(_separable_points()), method="svm")


def test_combiner_takes_the_majority_per_pattern():
    points = _separable_points()
    marker = Halfspace({(0, 0, 0): 1}, {}, -0.5)
    combiner = probe.fit_combiner([marker], probe.Dataset.from_points(points))
    assert combiner.truth_table == (0, 1)
    assert probe.dataset_accuracy(combiner, points) == 1.0


def test_combiner_size_is_capped():
    dataset = probe.Dataset.from_points(_separable_points())
    with pytest.raises(BudgetError):
        probe.fit_combiner([Halfspace({}, {}, 0)] * 21, dataset)
    with pytest.raises(ParameterError):
        probe.fit_combiner([], dataset)


def test_constant_classifier_sits_at_one_half():
    result = probe.accuracy(ConstantClassifier(1), gadget.BasicSampler(8, 2), 4000, seed=3)
    assert abs(result.estimate - 0.5) < 0.04


def test_accuracy_needs_samples():
    with pytest.raises(ParameterError):
        probe.accuracy(ConstantClassifier(1), gadget.BasicSampler(8, 2), 0, seed=0)


def test_averaged_perceptron_stays_on_observed_coordinates():
    dataset = probe.Dataset.from_points(_separable_points())
    h = probe.train_halfspace(dataset, "averaged_perceptron", epochs=3, seed=0)
    assert {("X",) + b for b in h.cx} <= set(dataset.feature_index)
    assert {("Y",) + b for b in h.cy} <= set(dataset.feature_index)
