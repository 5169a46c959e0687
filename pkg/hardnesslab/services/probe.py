"""Learner harness: train halfspaces and combiners on sampled data, measure accuracy."""
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np

from hardnesslab.core.errors import BudgetError, ParameterError
from hardnesslab.core.parallel import map_chunks
from hardnesslab.core.rng import point_rng, stream_id
from hardnesslab.core.stats import Proportion, wilson
from hardnesslab.models.classifier import BooleanOfHalfspaces, Classifier, Coordinate, Halfspace
from hardnesslab.models.point import SamplePoint

logger = logging.getLogger("hardnesslab.probe")

Method = Literal["perceptron", "averaged_perceptron", "logistic_sgd"]
MAX_COMBINER_INPUTS = 20

_TRAIN_STREAM = stream_id("probe.train")
_ACCURACY_STREAM = stream_id("probe.accuracy")


@dataclass(frozen=True, eq=False)
class Dataset:
    points: Tuple[SamplePoint, ...]
    feature_index: Dict[Coordinate, int]
    rows: Tuple[np.ndarray, ...]
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    @property
    def features(self) -> List[Coordinate]:
        return sorted(self.feature_index, key=self.feature_index.__getitem__)

    @classmethod
    def from_points(cls, points: Sequence[SamplePoint]) -> "Dataset":
        coordinates = set()
        for point in points:
            coordinates.update(("X",) + b for b in point.x)
            coordinates.update(("Y",) + b for b in point.y)
        index = {c: n for n, c in enumerate(sorted(coordinates))}
        rows = tuple(
            np.fromiter(
                [index[("X",) + b] for b in point.x] + [index[("Y",) + b] for b in point.y],
                dtype=np.int64,
            )
            for point in points
        )
        labels = np.fromiter((p.a for p in points), dtype=np.int64, count=len(points))
        return cls(tuple(points), index, rows, labels)


def _to_halfspace(dataset: Dataset, weights: np.ndarray, bias: float) -> Halfspace:
    coefficients = {
        c: float(weights[n]) for c, n in dataset.feature_index.items() if weights[n] != 0.0
    }
    return Halfspace.from_coordinates(coefficients, float(bias))


def train_halfspace(
    dataset: Dataset,
    method: Method = "perceptron",
    epochs: int = 5,
    seed: int = 0,
    learning_rate: float = 0.1,
) -> Halfspace:
    """Online training over the observed coordinates; deterministic given seed."""
    if len(dataset) == 0:
        raise ParameterError("cannot train on an empty dataset")
    if method not in ("perceptron", "averaged_perceptron", "logistic_sgd"):
        raise ParameterError(f"unknown training method {method!r}")
    rng = point_rng(seed, 0, _TRAIN_STREAM)
    n_features = len(dataset.feature_index)
    w = np.zeros(n_features)
    b = 0.0
    # averaged perceptron keeps sum_t c_t * update_t to recover the running mean
    u = np.zeros(n_features)
    ub = 0.0
    count = 1
    rows, labels = dataset.rows, dataset.labels
    for _ in range(epochs):
        for idx in rng.permutation(len(dataset)).tolist():
            feats = rows[idx]
            score = w[feats].sum() + b
            y = labels[idx]
            if method == "logistic_sgd":
                prob = 1.0 / (1.0 + math.exp(-max(min(score, 50.0), -50.0)))
                step = learning_rate * (y - prob)
                w[feats] += step
                b += step
                continue
            if (1 if score >= 0 else 0) != y:
                sign = 1.0 if y == 1 else -1.0
                w[feats] += sign
                b += sign
                if method == "averaged_perceptron":
                    u[feats] += count * sign
                    ub += count * sign
            count += 1
    if method == "averaged_perceptron":
        w = w - u / count
        b = b - ub / count
    logger.debug("trained %s halfspace over %d features", method, n_features)
    return _to_halfspace(dataset, w, b)


def fit_combiner(halfspaces: Sequence[Halfspace], dataset: Dataset) -> BooleanOfHalfspaces:
    """Majority label per sign pattern; ties and unseen patterns map to 1."""
    if len(halfspaces) > MAX_COMBINER_INPUTS:
        raise BudgetError(f"at most {MAX_COMBINER_INPUTS} halfspaces, got {len(halfspaces)}")
    if not halfspaces:
        raise ParameterError("need at least one halfspace")
    probe = BooleanOfHalfspaces(tuple(halfspaces), (1,) * 2 ** len(halfspaces))
    ones: Counter = Counter()
    zeros: Counter = Counter()
    for point in dataset.points:
        pattern = probe.pattern(point)
        (ones if point.a == 1 else zeros)[pattern] += 1
    table = tuple(1 if ones[p] >= zeros[p] else 0 for p in range(2 ** len(halfspaces)))
    return BooleanOfHalfspaces(tuple(halfspaces), table)


def dataset_accuracy(classifier: Classifier, points: Sequence[SamplePoint]) -> float:
    if not points:
        return 0.0
    return sum(classifier.evaluate(p) == p.a for p in points) / len(points)


def _correct_range(classifier, sampler, seed: int, start: int, stop: int) -> List[int]:
    out = []
    for index in range(start, stop):
        point = sampler.sample(point_rng(seed, index, _ACCURACY_STREAM))
        out.append(int(classifier.evaluate(point) == point.a))
    return out


def accuracy(classifier: Classifier, sampler, n: int, seed: int, workers: int = 1) -> Proportion:
    """Fresh-sample accuracy with a Wilson interval."""
    if n < 1:
        raise ParameterError("n must be positive")
    correct = map_chunks(partial(_correct_range, classifier, sampler, seed), n, workers)
    return wilson(sum(correct), n)
