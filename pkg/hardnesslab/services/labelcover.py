"""Smooth label cover instances: generation, smoothness and labeling scores."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hardnesslab.core.errors import InfeasibleInstanceError, ParameterError
from hardnesslab.core.rng import point_rng, stream_id
from hardnesslab.core.stats import stderr
from hardnesslab.models.label_cover import Hyperedge, LabelCoverInstance, Labeling

logger = logging.getLogger("hardnesslab.labelcover")

_PLANTED_STREAM = stream_id("labelcover.planted")
_RANDOM_STREAM = stream_id("labelcover.random")
_BASELINE_STREAM = stream_id("labelcover.baseline")


@dataclass(frozen=True)
class LabelingScore:
    strong_frac: float
    weak_frac: float
    strong_edges: Tuple[bool, ...]
    weak_edges: Tuple[bool, ...]


@dataclass(frozen=True)
class SmoothnessReport:
    vertex: int
    collision_rate: float
    pair_rates: Tuple[float, ...]
    edges_used: int

    @property
    def max_rate(self) -> float:
        return max(self.pair_rates, default=0.0)

    def is_smooth(self, J: float) -> bool:
        return self.max_rate <= 1.0 / J


def _check_shape(num_vertices: int, num_edges: int, k: int, M: int, m: int, d: int) -> None:
    if k < 1 or m < 1 or d < 1 or num_edges < 1:
        raise ParameterError("k, m, d and num_edges must be positive")
    if M < m:
        raise ParameterError(f"M={M} must be at least m={m}")
    if 2 * k > num_vertices:
        raise InfeasibleInstanceError(f"2k={2 * k} vertices per edge exceed num_vertices={num_vertices}")
    if M > d * m:
        raise InfeasibleInstanceError(
            f"M={M} > d*m={d * m}: no total projection [M]->[m] has preimages of size at most d"
        )


def _projection(rng: np.random.Generator, M: int, m: int, d: int, fixed: Optional[Tuple[int, int]] = None) -> Tuple[int, ...]:
    """Random total map [M]->[m] with every preimage of size <= d.

    Each label draws a uniform small label; a draw hitting a full block is
    redrawn among the blocks that still have room. ``fixed`` pins one
    (label, small label) pair first.
    """
    counts = np.zeros(m, dtype=np.int64)
    proj = [-1] * M
    if fixed is not None:
        label, small = fixed
        proj[label] = small
        counts[small] += 1
    for label in rng.permutation(M).tolist():
        if proj[label] >= 0:
            continue
        small = int(rng.integers(m))
        if counts[small] >= d:
            open_blocks = np.flatnonzero(counts < d)
            small = int(open_blocks[rng.integers(open_blocks.size)])
        proj[label] = small
        counts[small] += 1
    return tuple(proj)


def _edge_vertices(rng: np.random.Generator, num_vertices: int, k: int) -> Tuple[int, ...]:
    return tuple(int(v) for v in rng.choice(num_vertices, size=2 * k, replace=False))


def build_planted_instance(
    num_vertices: int, num_edges: int, k: int, M: int, m: int, d: int, seed: int
) -> Tuple[LabelCoverInstance, Labeling]:
    """Instance plus a labeling that strongly satisfies every hyperedge."""
    _check_shape(num_vertices, num_edges, k, M, m, d)
    rng = point_rng(seed, 0, _PLANTED_STREAM)
    sigma = tuple(int(x) for x in rng.integers(M, size=num_vertices))
    edges = []
    for _ in range(num_edges):
        vertices = _edge_vertices(rng, num_vertices, k)
        target = int(rng.integers(m))
        projections = tuple(_projection(rng, M, m, d, fixed=(sigma[v], target)) for v in vertices)
        edges.append(Hyperedge(vertices, vertices[:k], vertices[k:], projections))
    instance = LabelCoverInstance(k, M, m, d, num_vertices, tuple(edges))
    logger.info("built planted instance |V|=%d |E|=%d k=%d M=%d m=%d d=%d", num_vertices, num_edges, k, M, m, d)
    return instance, Labeling(sigma)


def build_random_instance(
    num_vertices: int, num_edges: int, k: int, M: int, m: int, d: int, seed: int
) -> LabelCoverInstance:
    _check_shape(num_vertices, num_edges, k, M, m, d)
    rng = point_rng(seed, 0, _RANDOM_STREAM)
    edges = []
    for _ in range(num_edges):
        vertices = _edge_vertices(rng, num_vertices, k)
        projections = tuple(_projection(rng, M, m, d) for _ in vertices)
        edges.append(Hyperedge(vertices, vertices[:k], vertices[k:], projections))
    logger.info("built random instance |V|=%d |E|=%d k=%d M=%d m=%d d=%d", num_vertices, num_edges, k, M, m, d)
    return LabelCoverInstance(k, M, m, d, num_vertices, tuple(edges))


def check_smoothness(
    instance: LabelCoverInstance,
    vertex: int,
    label_pairs: Sequence[Tuple[int, int]],
    rng: Optional[np.random.Generator] = None,
    edge_samples: Optional[int] = None,
) -> SmoothnessReport:
    """Collision rate Pr[pi_{e,v}(i) = pi_{e,v}(j)] over incident edges.

    Without ``rng``/``edge_samples`` the average is exact over all incident
    edges; otherwise ``edge_samples`` incident edges are drawn uniformly.
    """
    incident = instance.incident_edges(vertex)
    if not incident:
        raise ParameterError(f"vertex {vertex} has no incident hyperedge")
    if rng is not None and edge_samples:
        picked = [incident[i] for i in rng.integers(len(incident), size=edge_samples).tolist()]
    else:
        picked = list(incident)
    rates = []
    for i, j in label_pairs:
        hits = sum(
            1 for e in picked if instance.edges[e].project(vertex, i) == instance.edges[e].project(vertex, j)
        )
        rates.append(hits / len(picked))
    overall = sum(rates) / len(rates) if rates else 0.0
    return SmoothnessReport(vertex, overall, tuple(rates), len(picked))


def edge_satisfaction(edge: Hyperedge, labeling: Labeling) -> Tuple[bool, bool]:
    """(strongly satisfied, weakly satisfied) for one hyperedge."""
    projected = [edge.project(v, labeling[v]) for v in edge.vertices]
    distinct = len(set(projected))
    return distinct == 1, distinct < len(projected)


def evaluate_labeling(instance: LabelCoverInstance, labeling: Labeling) -> LabelingScore:
    if len(labeling) != instance.num_vertices:
        raise ParameterError("labeling must assign every vertex")
    strong: List[bool] = []
    weak: List[bool] = []
    for edge in instance.edges:
        s, w = edge_satisfaction(edge, labeling)
        strong.append(s)
        weak.append(w)
    n = len(instance.edges)
    if n == 0:
        raise ParameterError("instance has no edges to score")
    return LabelingScore(sum(strong) / n, sum(weak) / n, tuple(strong), tuple(weak))


def uniform_labeling(instance: LabelCoverInstance, rng: np.random.Generator) -> Labeling:
    return Labeling(tuple(int(x) for x in rng.integers(instance.M, size=instance.num_vertices)))


def uniform_labeling_baseline(instance: LabelCoverInstance, repeats: int, seed: int) -> Dict[str, float]:
    """Weak-satisfaction level reached by uniform random labelings."""
    if repeats < 1:
        raise ParameterError("repeats must be positive")
    scores = [
        evaluate_labeling(instance, uniform_labeling(instance, point_rng(seed, r, _BASELINE_STREAM))).weak_frac
        for r in range(repeats)
    ]
    return {"mean_weak_frac": float(np.mean(scores)), "stderr": stderr(scores), "repeats": repeats}
