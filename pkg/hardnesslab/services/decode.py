"""Randomized decoding of halfspace coefficients into Label Cover labelings."""
import logging
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hardnesslab.core.errors import ParameterError
from hardnesslab.core.parallel import map_chunks
from hardnesslab.core.rng import point_rng, stream_id
from hardnesslab.core.stats import mean_ci, wilson
from hardnesslab.models.classifier import Halfspace
from hardnesslab.models.label_cover import LabelCoverInstance, Labeling
from hardnesslab.schemas.report import CheckResult
from hardnesslab.services import critical_index as ci
from hardnesslab.services.labelcover import edge_satisfaction, evaluate_labeling, uniform_labeling_baseline

logger = logging.getLogger("hardnesslab.decode")

_DECODE_STREAM = stream_id("decode.repeat")
_EDGE_STREAM = stream_id("decode.edge")


@dataclass(frozen=True)
class Residual:
    labels: np.ndarray
    cumulative: np.ndarray

    @property
    def empty(self) -> bool:
        return self.labels.size == 0

    def pick(self, u: float) -> int:
        index = int(np.searchsorted(self.cumulative, u * self.cumulative[-1], side="right"))
        return int(self.labels[min(index, self.labels.size - 1)])


@dataclass(frozen=True)
class VertexPlan:
    top: Tuple[int, ...]
    residual_x: Residual
    residual_y: Residual


def _residual(h: Halfspace, side: str, vertex: int, tau: float, K: int) -> Tuple[frozenset, Residual]:
    c = ci.block_vector(h, side, vertex)
    report = ci.critical_index(c, tau, K)
    labels = sorted(i for i in c.blocks if i not in report.C_tau and c.norm_sq(i) > 0)
    weights = np.array([float(c.norm_sq(i)) for i in labels])
    return report.C_tau_leK, Residual(np.array(labels, dtype=np.int64), np.cumsum(weights))


def labeling_plan(
    instance: LabelCoverInstance, halfspaces: Sequence[Halfspace], tau: float, K: int
) -> Tuple[Dict[int, VertexPlan], ...]:
    """Per halfspace and vertex: the K-capped top labels and the residual weights of each side."""
    if not halfspaces:
        raise ParameterError("need at least one halfspace to decode")
    plans = []
    for h in halfspaces:
        per_vertex = {}
        for v in range(instance.num_vertices):
            top_x, res_x = _residual(h, "X", v, tau, K)
            top_y, res_y = _residual(h, "Y", v, tau, K)
            per_vertex[v] = VertexPlan(tuple(sorted(top_x | top_y)), res_x, res_y)
        plans.append(per_vertex)
    return tuple(plans)


def sample_labeling(
    plans: Sequence[Dict[int, VertexPlan]], num_vertices: int, M: int, rng: np.random.Generator
) -> Labeling:
    """Each vertex picks a halfspace; then a top label w.p. 1/2, else a residual label on a fair-coin side."""
    chosen = rng.integers(len(plans), size=num_vertices)
    draws = rng.random((num_vertices, 4))
    labels: List[int] = []
    for v in range(num_vertices):
        plan = plans[int(chosen[v])][v]
        use_top, side_coin, u, fallback = draws[v]
        if use_top < 0.5 and plan.top:
            labels.append(plan.top[min(int(u * len(plan.top)), len(plan.top) - 1)])
            continue
        residual = plan.residual_x if side_coin < 0.5 else plan.residual_y
        if residual.empty:
            labels.append(min(int(fallback * M), M - 1))
        else:
            labels.append(residual.pick(u))
    return Labeling(tuple(labels))


def randomized_labeling(
    instance: LabelCoverInstance,
    halfspaces: Sequence[Halfspace],
    tau: float,
    K: int,
    rng: np.random.Generator,
) -> Labeling:
    plans = labeling_plan(instance, halfspaces, tau, K)
    return sample_labeling(plans, instance.num_vertices, instance.M, rng)


def decoding_bound(nu: float, ell: int, tau: float, K: int) -> float:
    """Expected weak-satisfaction level promised for a non-dictator classifier."""
    return (nu / 4.0) * (1.0 / (16.0 * ell**2)) * min(1.0 / K**2, tau**4 / K)


def _score_range(instance, plans, seed: int, start: int, stop: int) -> List[Tuple[float, float]]:
    out = []
    for r in range(start, stop):
        labeling = sample_labeling(plans, instance.num_vertices, instance.M, point_rng(seed, r, _DECODE_STREAM))
        score = evaluate_labeling(instance, labeling)
        out.append((score.weak_frac, score.strong_frac))
    return out


def decode_and_score(
    instance: LabelCoverInstance,
    halfspaces: Sequence[Halfspace],
    tau: float,
    K: int,
    repeats: int,
    seed: int,
    nu: float = 0.1,
    workers: int = 1,
    baseline: bool = True,
) -> CheckResult:
    """Mean and best weak fraction over ``repeats`` decoded labelings."""
    if repeats < 1:
        raise ParameterError("repeats must be positive")
    plans = labeling_plan(instance, halfspaces, tau, K)
    scores = map_chunks(partial(_score_range, instance, plans, seed), repeats, workers)
    weak = [w for w, _ in scores]
    strong = [s for _, s in scores]
    mean, low, high = mean_ci(weak)
    bound = decoding_bound(nu, len(halfspaces), tau, K)
    details = {
        "best_weak_frac": max(weak),
        "best_strong_frac": max(strong),
        "mean_strong_frac": float(np.mean(strong)),
        "ell": len(halfspaces),
    }
    vacuous = False
    if baseline:
        reference = uniform_labeling_baseline(instance, repeats, seed)
        details["baseline"] = reference
        vacuous = bound <= reference["mean_weak_frac"]
    logger.info("decoded %d labelings: mean weak %.4f, best %.4f", repeats, mean, max(weak))
    return CheckResult(
        name="decode",
        estimate=mean,
        ci95=(low, high),
        bound=bound,
        bound_vacuous=vacuous,
        passed=high >= bound,
        trials=repeats,
        details=details,
    )


def _edge_range(instance, plans, edge_id: int, seed: int, start: int, stop: int) -> List[int]:
    edge = instance.edges[edge_id]
    out = []
    for r in range(start, stop):
        labeling = sample_labeling(plans, instance.num_vertices, instance.M, point_rng(seed, r, _EDGE_STREAM))
        out.append(int(edge_satisfaction(edge, labeling)[1]))
    return out


def edge_success_mc(
    instance: LabelCoverInstance,
    edge_id: int,
    halfspaces: Sequence[Halfspace],
    tau: float,
    K: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CheckResult:
    """Weak-satisfaction frequency of one edge against the level its firing condition guarantees."""
    conditions = ci.structural_conditions(instance, edge_id, halfspaces, tau, K)
    ell = len(halfspaces)
    bound: Optional[float] = None
    if conditions.condition_I:
        bound = 1.0 / (16.0 * K**2 * ell**2)
    elif conditions.condition_II:
        bound = tau**4 / (16.0 * K * ell**2)
    plans = labeling_plan(instance, halfspaces, tau, K)
    hits = map_chunks(partial(_edge_range, instance, plans, edge_id, seed), trials, workers)
    estimate = wilson(sum(hits), trials)
    return CheckResult(
        name="edge_success",
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        passed=None if bound is None else estimate.high >= bound,
        trials=trials,
        details={
            "edge": edge_id,
            "condition_I": conditions.first_I,
            "condition_II": conditions.first_II,
        },
    )
