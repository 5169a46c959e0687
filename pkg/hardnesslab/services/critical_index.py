"""Critical index of block-structured coefficients, truncation, and the decoding conditions."""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from hardnesslab.core.errors import InvariantError, NicenessError, ParameterError
from hardnesslab.core.parallel import map_chunks
from hardnesslab.core.rng import point_rng, stream_id
from hardnesslab.core.stats import wilson
from hardnesslab.models.block_vector import BlockVector, CriticalIndexReport, exact_gt
from hardnesslab.models.classifier import Halfspace
from hardnesslab.models.label_cover import Hyperedge, LabelCoverInstance
from hardnesslab.schemas.params import GadgetParams
from hardnesslab.schemas.report import CheckResult
from hardnesslab.services.gadget import EdgeSampler

logger = logging.getLogger("hardnesslab.critical_index")

_TRUNCATION_STREAM = stream_id("critical_index.truncation")
_ANCHOR_STREAM = stream_id("critical_index.anchor")
DECAY_REL_TOL = 1e-12


def _check_tau(tau: float, K: int) -> None:
    if not 0.0 < tau < 1.0:
        raise ParameterError(f"tau must lie in (0, 1), got {tau}")
    if K < 1:
        raise ParameterError(f"K must be positive, got {K}")


def critical_index(c: BlockVector, tau: float, K: int) -> CriticalIndexReport:
    """One descending-norm pass with suffix sums; ties go to the smaller label."""
    _check_tau(tau, K)
    norms = c.norms_sq
    order = sorted(norms, key=lambda i: (-norms[i], i))
    values = [norms[i] for i in order]
    exact = c.integral
    factor = Fraction(tau) if exact else tau

    suffix: List = [0] * (len(values) + 1)
    for pos in range(len(values) - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + values[pos]

    i_tau = len(values) + 1
    for pos, value in enumerate(values):
        if value <= factor * suffix[pos]:
            i_tau = pos + 1
            break
    critical = order[: i_tau - 1]
    return CriticalIndexReport(
        order=tuple(order),
        i_tau=i_tau,
        C_tau=frozenset(critical),
        C_tau_leK=frozenset(critical[:K]),
        tau=tau,
        K=K,
    )


@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    witness: Optional[Tuple[int, int, float, float]] = None


def check_crit_decay(c: BlockVector, tau: float, i_tau: Optional[int] = None) -> DecayCheck:
    """||c_s(i2)||^2 <= (1/tau)(1-tau)^(i2-i1) ||c_s(i1)||^2 for 1 <= i1 < i2 <= i_tau.

    ``i_tau`` overrides the computed critical index.
    """
    report = critical_index(c, tau, 1)
    values = [float(c.norm_sq(i)) for i in report.order]
    last = min(report.i_tau if i_tau is None else i_tau, len(values))
    for i1 in range(1, last + 1):
        for i2 in range(i1 + 1, last + 1):
            lhs = values[i2 - 1]
            rhs = (1.0 / tau) * (1.0 - tau) ** (i2 - i1) * values[i1 - 1]
            if lhs > rhs * (1.0 + DECAY_REL_TOL):
                return DecayCheck(False, (i1, i2, lhs, rhs))
    return DecayCheck(True)


def block_vector(h: Halfspace, side: str, vertex: int, num_labels: Optional[int] = None) -> BlockVector:
    """Coefficients of one (side, vertex) of a halfspace as label blocks."""
    entries = h.vertex_coefficients(side, vertex)
    if not entries:
        return BlockVector({}, (side, vertex), num_labels)
    width = max(q for _, q in entries) + 1
    integral = all(isinstance(c, (int, np.integer)) for c in entries.values())
    blocks: Dict[int, np.ndarray] = {}
    for (i, q), coef in entries.items():
        if i not in blocks:
            blocks[i] = np.zeros(width, dtype=np.int64 if integral else float)
        blocks[i][q] = coef
    return BlockVector(blocks, (side, vertex), num_labels)


def _edge_vertices(edge: Hyperedge, vertex: Optional[int]) -> List[int]:
    if vertex is None:
        return list(edge.vertices)
    if not edge.contains(vertex):
        raise ParameterError(f"vertex {vertex} is not on the edge")
    return [vertex]


def truncation_plan(
    h: Halfspace, edge: Hyperedge, tau: float, K: int, vertex: Optional[int] = None
) -> Dict[int, FrozenSet[int]]:
    """vertex -> critical labels beyond the top K on that vertex's own side."""
    plan = {}
    for v in _edge_vertices(edge, vertex):
        report = critical_index(block_vector(h, edge.side(v), v), tau, K)
        plan[v] = report.tail
    return plan


def truncate(h: Halfspace, edge: Hyperedge, tau: float, K: int, vertex: Optional[int] = None) -> Halfspace:
    """Zero the tail-critical blocks (X side on e_X, Y side on e_Y)."""
    truncated = h
    for v, labels in truncation_plan(h, edge, tau, K, vertex).items():
        if labels:
            truncated = truncated.without(edge.side(v), v, labels)
    return truncated


def is_truncated(h: Halfspace, edge: Hyperedge, tau: float, K: int) -> bool:
    return not any(truncation_plan(h, edge, tau, K).values())


@dataclass(frozen=True)
class IvLv:
    I_v: Tuple[FrozenSet[int], ...]
    L_v: FrozenSet[int]


def _heavy_residual(c: BlockVector, report: CriticalIndexReport, d: int) -> Set[int]:
    residual = [i for i in c.blocks if i not in report.C_tau]
    mass = c.mass(residual)
    factor = Fraction(1, d**8)
    return {i for i in residual if exact_gt(c.norm_sq(i), mass, factor)}


def compute_Iv_Lv(
    halfspaces: Sequence[Halfspace], vertex: int, tau: float, K: int, d: int, num_labels: Optional[int] = None
) -> IvLv:
    per_halfspace = []
    for h in halfspaces:
        labels: Set[int] = set()
        for side in ("X", "Y"):
            c = block_vector(h, side, vertex, num_labels)
            report = critical_index(c, tau, K)
            labels |= report.C_tau_leK
            labels |= _heavy_residual(c, report, d)
        if len(labels) > 2 * (K + d**8):
            raise InvariantError(f"|I_v| = {len(labels)} exceeds 2(K + d^8)", witness=vertex)
        per_halfspace.append(frozenset(labels))
    union = frozenset().union(*per_halfspace) if per_halfspace else frozenset()
    return IvLv(tuple(per_halfspace), union)


@dataclass(frozen=True)
class NicenessReport:
    nice: bool
    witness: Optional[Tuple[int, int, int, int]] = None  # (vertex, label, label, small label)


def niceness_check(instance: LabelCoverInstance, edge_id: int, label_sets: Mapping[int, Sequence[int]]) -> NicenessReport:
    edge = instance.edges[edge_id]
    for v in edge.vertices:
        seen: Dict[int, int] = {}
        for i in sorted(label_sets.get(v, ())):
            j = edge.project(v, i)
            if j in seen:
                return NicenessReport(False, (v, seen[j], i, j))
            seen[j] = i
    return NicenessReport(True)


def edge_label_sets(
    instance: LabelCoverInstance, edge_id: int, halfspaces: Sequence[Halfspace], tau: float, K: int
) -> Dict[int, FrozenSet[int]]:
    edge = instance.edges[edge_id]
    return {
        v: compute_Iv_Lv(halfspaces, v, tau, K, instance.d, instance.M).L_v for v in edge.vertices
    }


def require_nice(
    instance: LabelCoverInstance, edge_id: int, halfspaces: Sequence[Halfspace], tau: float, K: int
) -> None:
    report = niceness_check(instance, edge_id, edge_label_sets(instance, edge_id, halfspaces, tau, K))
    if not report.nice:
        raise NicenessError(f"edge {edge_id} is not nice for these coefficients", witness=report.witness)


def top_sets(
    edge: Hyperedge, halfspaces: Sequence[Halfspace], tau: float, K: int
) -> Dict[int, List[FrozenSet[int]]]:
    """vertex -> [B_{s,v}] with B_{s,v} the union of the K-capped critical sets of both sides."""
    out: Dict[int, List[FrozenSet[int]]] = {}
    for v in edge.vertices:
        out[v] = [
            critical_index(block_vector(h, "X", v), tau, K).C_tau_leK
            | critical_index(block_vector(h, "Y", v), tau, K).C_tau_leK
            for h in halfspaces
        ]
    return out


@dataclass(frozen=True)
class StructuralReport:
    condition_I: Tuple[Tuple[int, int, int, int, int], ...]  # (u, v, r, p, j)
    condition_II: Tuple[Tuple[int, int, int, int, str], ...]  # (u, v, r, j, side)

    @property
    def fired(self) -> bool:
        return bool(self.condition_I or self.condition_II)

    @property
    def first_I(self):
        return self.condition_I[0] if self.condition_I else None

    @property
    def first_II(self):
        return self.condition_II[0] if self.condition_II else None


def structural_conditions(
    instance: LabelCoverInstance,
    edge_id: int,
    halfspaces: Sequence[Halfspace],
    tau: float,
    K: int,
    truncate_first: bool = False,
) -> StructuralReport:
    """Exhaustive check of the two decoding conditions on one nice edge."""
    edge = instance.edges[edge_id]
    if truncate_first:
        halfspaces = [truncate(h, edge, tau, K) for h in halfspaces]
    require_nice(instance, edge_id, halfspaces, tau, K)

    tops = top_sets(edge, halfspaces, tau, K)
    projected = {
        (s, v): frozenset(edge.project(v, i) for i in tops[v][s])
        for v in edge.vertices
        for s in range(len(halfspaces))
    }

    condition_I = []
    vertices = edge.vertices
    for a in range(len(vertices)):
        for b in range(a + 1, len(vertices)):
            u, v = vertices[a], vertices[b]
            for r in range(len(halfspaces)):
                for p in range(len(halfspaces)):
                    for j in sorted(projected[(r, u)] & projected[(p, v)]):
                        condition_I.append((u, v, r, p, j))

    tau4 = Fraction(tau) ** 4
    condition_II = []
    for r, h in enumerate(halfspaces):
        sides = {}
        for v in vertices:
            for side in ("X", "Y"):
                c = block_vector(h, side, v)
                sides[(v, side)] = (c, critical_index(c, tau, K))
        for u in vertices:
            for j in sorted(projected[(r, u)]):
                for v in vertices:
                    if v == u:
                        continue
                    for side in ("X", "Y"):
                        c, report = sides[(v, side)]
                        if any(edge.project(v, i) == j for i in report.C_tau_leK):
                            continue
                        residual = [i for i in c.blocks if i not in report.C_tau]
                        in_block = [i for i in residual if edge.project(v, i) == j]
                        if in_block and exact_gt(c.mass(in_block), c.mass(residual), tau4):
                            condition_II.append((u, v, r, j, side))
    return StructuralReport(tuple(condition_I), tuple(condition_II))


# ── Monte Carlo checks of the truncation step ────────────────────────────────


def _disagreement_range(sampler, h, h_tilde, seed: int, start: int, stop: int) -> List[int]:
    out = []
    for index in range(start, stop):
        point = sampler.sample(point_rng(seed, index, _TRUNCATION_STREAM))
        out.append(int(h.evaluate(point) != h_tilde.evaluate(point)))
    return out


def truncation_disagreement_mc(
    instance: LabelCoverInstance,
    edge_id: int,
    h: Halfspace,
    params: GadgetParams,
    trials: int,
    seed: int,
    tau: Optional[float] = None,
    K: Optional[int] = None,
    vertex: Optional[int] = None,
    workers: int = 1,
) -> CheckResult:
    """E|pos(h) - pos(h~)| on the edge's distribution against tau^(1/4)/(4k) per truncated vertex."""
    tau = params.tau if tau is None else tau
    K = params.K if K is None else K
    edge = instance.edges[edge_id]
    require_nice(instance, edge_id, [h], tau, K)
    h_tilde = truncate(h, edge, tau, K, vertex)
    per_vertex = tau**0.25 / (4 * edge.k)
    bound = per_vertex * len(_edge_vertices(edge, vertex))
    if h_tilde == h:
        flags: List[int] = []
        disagreements = 0
    else:
        sampler = EdgeSampler(instance, params, edge_id)
        flags = map_chunks(partial(_disagreement_range, sampler, h, h_tilde, seed), trials, workers)
        disagreements = sum(flags)
    estimate = wilson(disagreements, trials)
    logger.info("truncation disagreement %.5f (bound %.4g) on edge %d", estimate.estimate, bound, edge_id)
    return CheckResult(
        name="truncation_disagreement",
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        bound_vacuous=bound >= 1.0,
        passed=estimate.low <= bound,
        trials=trials,
        details={
            "per_vertex_bound": per_vertex,
            "tau": tau,
            "K": K,
            "zeroed_blocks": sum(len(s) for s in truncation_plan(h, edge, tau, K, vertex).values()),
            "identity": h_tilde == h,
        },
    )


def _anchor_counts(
    projections: np.ndarray, beta: int, zeta: float, inside_prob: float, m: int, seed: int, start: int, stop: int
) -> List[int]:
    rng = point_rng(seed, start, _ANCHOR_STREAM)
    n = stop - start
    b = (rng.random((n, m)) >= zeta).astype(np.int64)
    inside = rng.random((n, m)) < inside_prob
    good = (b == beta) & ~inside
    if projections.size == 0:
        return [0] * n
    return good[:, projections].sum(axis=1).tolist()


def anchor_set_tail_mc(
    instance: LabelCoverInstance,
    edge_id: int,
    vertex: int,
    h: Halfspace,
    params: GadgetParams,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CheckResult:
    """Frequency of |A| <= K*zeta/8 against exp(-K*zeta/64).

    A counts the first floor(K/4) critical labels of the vertex whose block
    carries noise on the vertex's side.
    """
    edge = instance.edges[edge_id]
    side = edge.side(vertex)
    report = critical_index(block_vector(h, side, vertex), params.tau, params.K)
    head = [i for i in report.order[: report.i_tau - 1]][: params.K // 4]
    projections = np.array([edge.project(vertex, i) for i in head], dtype=np.int64)
    beta = 0 if side == "X" else 1
    counts = map_chunks(
        partial(_anchor_counts, projections, beta, params.zeta, params.t / edge.k, instance.m, seed),
        trials,
        workers,
    )
    threshold = params.K * params.zeta / 8.0
    short = sum(1 for c in counts if c <= threshold)
    estimate = wilson(short, trials)
    bound = math.exp(-params.K * params.zeta / 64.0)
    return CheckResult(
        name="anchor_set_tail",
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        bound_vacuous=bound >= 1.0,
        passed=estimate.low <= bound,
        trials=trials,
        details={"head_size": len(head), "threshold": threshold, "vertex": vertex},
    )


@dataclass(frozen=True)
class RegularPart:
    """Top blocks, the projected top set P, and the regular remainder of one edge."""

    B: Dict[int, FrozenSet[int]]
    P: FrozenSet[int]
    reg_labels: Dict[int, FrozenSet[int]]
    reg_mass: Dict[int, float]
    alpha: Dict[int, float]


def regular_part(
    instance: LabelCoverInstance,
    edge_id: int,
    blockvecs: Mapping[int, BlockVector],
    params: GadgetParams,
    split: bool = True,
) -> RegularPart:
    """With ``split=False`` the vectors are taken to be regular already."""
    edge = instance.edges[edge_id]
    if split:
        B = {v: critical_index(c, params.tau, params.K).C_tau for v, c in blockvecs.items()}
    else:
        B = {v: frozenset() for v in blockvecs}
    P = frozenset(edge.project(v, i) for v, labels in B.items() for i in labels)
    reg_labels = {}
    reg_mass = {}
    alpha = {}
    thin = 1.0 - params.t / edge.k
    for v, c in blockvecs.items():
        labels = frozenset(i for i in c.blocks if i not in B[v] and edge.project(v, i) not in P)
        reg_labels[v] = labels
        reg_mass[v] = float(c.mass(labels))
        alpha[v] = thin * (params.zeta if edge.side(v) == "X" else 1.0 - params.zeta)
    return RegularPart(B, P, reg_labels, reg_mass, alpha)


def truncation_fixed_point(c: BlockVector, tau: float, K: int) -> bool:
    """After zeroing the tail, the critical set is exactly the old K-capped set."""
    report = critical_index(c, tau, K)
    after = critical_index(c.without(report.tail), tau, K)
    return after.C_tau == report.C_tau_leK


def random_block_vector(rng: np.random.Generator, max_labels: int = 64, max_slots: int = 8) -> BlockVector:
    """Gaussian blocks with a random geometric decay across labels."""
    M = int(rng.integers(1, max_labels + 1))
    Q = int(rng.integers(1, max_slots + 1))
    decay = np.exp(-rng.uniform(0.0, 3.0) * rng.permutation(M))
    dense = rng.normal(size=(M, Q)) * decay[:, None]
    return BlockVector.from_dense(dense)
