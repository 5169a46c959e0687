"""Point-label distributions of the reduction and their parameters.

Coordinates are (side, vertex, big label, slot). The basic test uses vertex 0
for its single X vector and vertex r for Y_r; the simplified blocked test uses
vertices 0..k-1 on both sides and blocks B_j = {j*d, ..., j*d + d - 1}.
"""
import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Collection, Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from hardnesslab.core.config import settings
from hardnesslab.core.errors import CouplingError, InvariantError, NicenessError, ParameterError
from hardnesslab.core.parallel import map_chunks
from hardnesslab.core.rng import child_seed, point_rng, stream_id
from hardnesslab.core.stats import two_proportion_z, wilson
from hardnesslab.models.label_cover import Hyperedge, LabelCoverInstance
from hardnesslab.models.point import Bit, BlockDraw, SamplePoint, Transcript
from hardnesslab.schemas.params import GadgetParams

logger = logging.getLogger("hardnesslab.gadget")

_FILL_STREAM = stream_id("gadget.fill")

Coordinate = Tuple[str, int, int, int]
TopSets = Mapping[int, Union[Collection[int], Sequence[Collection[int]]]]


# ── parameters ───────────────────────────────────────────────────────────────


def derive_params(zeta: float, nu: float, ell: int, z: int) -> GadgetParams:
    for name, value in (("zeta", zeta), ("nu", nu)):
        if not math.isfinite(value) or not 0.0 < value < 0.5:
            raise ParameterError(f"{name} must lie in (0, 1/2), got {value}")
    if ell < 1 or z < 1:
        raise ParameterError("ell and z must be at least 1")
    d = 4**z
    spread = zeta * (1.0 - zeta)
    k = math.ceil(10.0 / spread**2)
    if k % 2:
        k += 1
    t = max(1, k // 4)
    Q = 16 * d * k
    tau = (10.0 * k * math.log(Q)) ** -2
    K = math.ceil((20.0 / tau) * math.log(Q / tau))
    J = 1e3 * ell**2 * math.log(d * k) ** 2 * float(d) ** 20 / (nu * spread**2)
    return GadgetParams(
        zeta=zeta, nu=nu, ell=ell, z=z, d=d, k=k, t=t, Q=Q, tau=tau, K=K, J=J, paper_faithful=True
    )


def zero_point_acceptance(params: GadgetParams) -> float:
    """Probability of the per-block indicator gate for zero points."""
    p = params.zero_accept
    if p > 1.0:
        if params.clamp_acceptance:
            return 1.0
        raise ParameterError(
            f"1/(zeta(1-zeta)t) = {p:.4f} > 1 is not a probability; raise t or set clamp_acceptance"
        )
    return p


# ── overview distributions ───────────────────────────────────────────────────


def sample_basic_I(M: int, k: int, rng: np.random.Generator) -> SamplePoint:
    if M < 1 or k < 1:
        raise ParameterError("M and k must be positive")
    a = int(rng.integers(2))
    if a == 1:
        s = int(rng.integers(k))
        x = frozenset((0, i, 0) for i in range(M))
        y = frozenset((s, i, 0) for i in range(M))
        return SamplePoint(a, x, y)
    on_x = rng.integers(2, size=M).tolist()
    r = rng.integers(k, size=M).tolist()
    x = frozenset((0, i, 0) for i in range(M) if on_x[i])
    y = frozenset((r[i], i, 0) for i in range(M) if not on_x[i])
    return SamplePoint(a, x, y)


def sample_simplified_D(
    m: int, d: int, k: int, Q: int, rng: np.random.Generator, zero_accept: Optional[float] = None
) -> SamplePoint:
    """Simplified blocked test over k vertices per side.

    ``zero_accept`` defaults to 1/k; 4/k is the value at which first moments
    of the two classes coincide.
    """
    if k % 2:
        raise ParameterError(f"k must be even, got {k}")
    if m < 1 or d < 1 or Q < 1:
        raise ParameterError("m, d and Q must be positive")
    p = 1.0 / k if zero_accept is None else zero_accept
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"zero_accept={p} is not a probability")
    half = k // 2
    a = int(rng.integers(2))
    x: Set[Bit] = set()
    y: Set[Bit] = set()
    draws = []
    for j in range(m):
        labels = range(j * d, (j + 1) * d)
        b = int(rng.integers(2))
        S = tuple(sorted(rng.permutation(k)[:half].tolist()))
        outside = [r for r in range(k) if r not in S]
        r_x = S[int(rng.integers(half))]
        r_y = S[int(rng.integers(half))]
        noisy = x if b == 0 else y
        noise = rng.integers(0, 2, size=(len(outside) * d, Q))
        rows, slots = np.nonzero(noise)
        pairs = [(v, i) for v in outside for i in labels]
        noisy.update((pairs[row][0], pairs[row][1], q) for row, q in zip(rows.tolist(), slots.tolist()))
        accepted = False
        if a == 1:
            for i in labels:
                x.add((r_x, i, int(rng.integers(Q))))
                y.add((r_y, i, int(rng.integers(Q))))
        else:
            accepted = bool(rng.random() < p)
            if accepted:
                target = x if b == 0 else y
                for v in S:
                    for i in labels:
                        target.add((v, i, int(rng.integers(Q))))
        draws.append(BlockDraw(j=j, b=b, S=S, u_x=r_x, u_y=r_y, accepted=accepted))
    transcript = Transcript(a=a, edge_id=-1, blocks=tuple(draws))
    return SamplePoint(a, frozenset(x), frozenset(y), -1, transcript)


# ── the reduction distribution ───────────────────────────────────────────────


def _draw_structure(
    edge: Hyperedge, edge_id: int, a: int, params: GadgetParams, m: int, rng: np.random.Generator
) -> Transcript:
    """All structural draws of one point in a single uniform batch.

    Columns: k keys for S_j, k keys for S'_j, b_j, u_X, u_Y, gate, t thinning coins.
    """
    k, t, zeta = edge.k, params.t, params.zeta
    if t > k:
        raise ParameterError(f"t={t} exceeds k={k}")
    p = zero_point_acceptance(params)
    u = rng.random((m, 2 * k + 4 + t))
    pick_x = np.sort(np.argsort(u[:, :k], axis=1)[:, :t], axis=1).tolist()
    pick_y = np.sort(np.argsort(u[:, k : 2 * k], axis=1)[:, :t], axis=1).tolist()
    rest = u[:, 2 * k :].tolist()
    blocks = []
    for j in range(m):
        S = tuple(edge.ex[p_] for p_ in pick_x[j])
        S_prime = tuple(edge.ey[p_] for p_ in pick_y[j])
        coin_b, coin_ux, coin_uy, coin_gate = rest[j][:4]
        thin = rest[j][4:]
        b = 0 if coin_b < zeta else 1
        if a == 1:
            blocks.append(
                BlockDraw(
                    j=j, b=b, S=S, S_prime=S_prime,
                    u_x=S[int(coin_ux * t)], u_y=S_prime[int(coin_uy * t)],
                )
            )
            continue
        accepted = coin_gate < p
        T: Tuple[int, ...] = ()
        T_prime: Tuple[int, ...] = ()
        if accepted and b == 0:
            T = tuple(v for v, c in zip(S, thin) if c < 1.0 - zeta)
        elif accepted:
            T_prime = tuple(v for v, c in zip(S_prime, thin) if c < zeta)
        blocks.append(BlockDraw(j=j, b=b, S=S, S_prime=S_prime, accepted=accepted, T=T, T_prime=T_prime))
    return Transcript(a=a, edge_id=edge_id, blocks=tuple(blocks))


def _fill_plan(edge: Hyperedge, blocks: Sequence[BlockDraw], a: int):
    """Noise blocks and indicator blocks implied by the structural draws.

    Returns two lists of (side, vertex, label).
    """
    noise: List[Tuple[str, int, int]] = []
    indicators: List[Tuple[str, int, int]] = []
    for blk in blocks:
        j = blk.j
        if blk.b == 0:
            inside = set(blk.S)
            noise.extend(("X", v, i) for v in edge.ex if v not in inside for i in edge.preimage(v, j))
        else:
            inside = set(blk.S_prime)
            noise.extend(("Y", v, i) for v in edge.ey if v not in inside for i in edge.preimage(v, j))
        if a == 1:
            indicators.extend(("X", blk.u_x, i) for i in edge.preimage(blk.u_x, j))
            indicators.extend(("Y", blk.u_y, i) for i in edge.preimage(blk.u_y, j))
        else:
            indicators.extend(("X", v, i) for v in blk.T for i in edge.preimage(v, j))
            indicators.extend(("Y", v, i) for v in blk.T_prime for i in edge.preimage(v, j))
    return noise, indicators


def _fill(noise, indicators, Q: int, fill: np.random.Generator) -> Tuple[Set[Bit], Set[Bit]]:
    x: Set[Bit] = set()
    y: Set[Bit] = set()
    if noise:
        bits = fill.integers(0, 2, size=(len(noise), Q), dtype=np.uint8)
        rows, slots = np.nonzero(bits)
        for row, q in zip(rows.tolist(), slots.tolist()):
            side, v, i = noise[row]
            (x if side == "X" else y).add((v, i, q))
    if indicators:
        for (side, v, i), q in zip(indicators, fill.integers(0, Q, size=len(indicators)).tolist()):
            (x if side == "X" else y).add((v, i, q))
    return x, y


def replay_point(instance: LabelCoverInstance, params: GadgetParams, transcript: Transcript) -> SamplePoint:
    """Rebuild a point bit-for-bit from its transcript."""
    edge = instance.edges[transcript.edge_id]
    noise, indicators = _fill_plan(edge, transcript.blocks, transcript.a)
    fill = point_rng(transcript.fill_seed, 0, _FILL_STREAM)
    x, y = _fill(noise, indicators, params.Q, fill)
    point = SamplePoint(transcript.a, frozenset(x), frozenset(y), transcript.edge_id, transcript)
    if settings.DEBUG:
        assert_point_structure(point, instance, params)
    return point


def sample_edge(
    instance: LabelCoverInstance, params: GadgetParams, edge_id: int, a: int, rng: np.random.Generator
) -> SamplePoint:
    """A draw from the restriction of the reduction distribution to one edge and one label."""
    if not 0 <= edge_id < len(instance.edges):
        raise ParameterError(f"edge {edge_id} out of range")
    edge = instance.edges[edge_id]
    structure = _draw_structure(edge, edge_id, a, params, instance.m, rng)
    transcript = Transcript(a=a, edge_id=edge_id, blocks=structure.blocks, fill_seed=child_seed(rng))
    return replay_point(instance, params, transcript)


def sample_global(instance: LabelCoverInstance, params: GadgetParams, rng: np.random.Generator) -> SamplePoint:
    if params.t > instance.k:
        raise ParameterError(f"t={params.t} exceeds k={instance.k}")
    edge_id = int(rng.integers(len(instance.edges)))
    a = int(rng.integers(2))
    return sample_edge(instance, params, edge_id, a, rng)


def assert_point_structure(point: SamplePoint, instance: LabelCoverInstance, params: GadgetParams) -> None:
    """Indicator blocks hold one slot; only noise and indicator blocks hold bits."""
    if point.transcript is None:
        raise InvariantError("structural check needs the point's transcript")
    edge = instance.edges[point.edge_id]
    noise, indicators = _fill_plan(edge, point.transcript.blocks, point.a)
    allowed = set(noise) | set(indicators)
    counts: Dict[Tuple[str, int, int], int] = {}
    for side, bits in (("X", point.x), ("Y", point.y)):
        for v, i, q in bits:
            if not 0 <= q < params.Q:
                raise InvariantError(f"slot {q} out of range", witness=(side, v, i, q))
            if (side, v, i) not in allowed:
                raise InvariantError("bit outside every drawn block", witness=(side, v, i, q))
            counts[(side, v, i)] = counts.get((side, v, i), 0) + 1
    for block in indicators:
        if counts.get(block, 0) != 1:
            raise InvariantError("indicator block without exactly one set slot", witness=block)


# ── coupled pair ─────────────────────────────────────────────────────────────


def _union_top_sets(top_sets: TopSets) -> Dict[int, Set[int]]:
    merged: Dict[int, Set[int]] = {}
    for v, sets in top_sets.items():
        labels: Set[int] = set()
        for item in sets:
            if isinstance(item, (int, np.integer)):
                labels.add(int(item))
            else:
                labels.update(int(i) for i in item)
        merged[int(v)] = labels
    return merged


def _top_owners(edge: Hyperedge, top_sets: TopSets) -> Dict[int, Tuple[int, int]]:
    """small label j -> (vertex, top label) for the single top variable of block j."""
    owners: Dict[int, Tuple[int, int]] = {}
    merged = _union_top_sets(top_sets)
    for v in edge.vertices:
        seen: Dict[int, int] = {}
        for i in sorted(merged.get(v, ())):
            j = edge.project(v, i)
            if j in seen:
                raise NicenessError(
                    f"labels {seen[j]} and {i} of vertex {v} share projection {j}", witness=(v, seen[j], i, j)
                )
            seen[j] = i
        for j, i in seen.items():
            if j in owners:
                u = owners[j][0]
                raise CouplingError(
                    f"vertices {u} and {v} both have top labels projecting to {j}", witness=(u, v, j)
                )
            owners[j] = (v, i)
    return owners


def _draw_subset(members: Sequence[int], t: int, rng: np.random.Generator) -> Tuple[int, ...]:
    order = np.sort(np.argsort(rng.random(len(members)))[:t]).tolist()
    return tuple(members[p] for p in order)


def _zero_part(blk_b: int, S, S_prime, params: GadgetParams, p: float, rng):
    """Gate and thinning of a zero-point block given b_j."""
    accepted = bool(rng.random() < p)
    T: Tuple[int, ...] = ()
    T_prime: Tuple[int, ...] = ()
    if accepted and blk_b == 0:
        T = tuple(v for v in S if rng.random() < 1.0 - params.zeta)
    elif accepted:
        T_prime = tuple(v for v in S_prime if rng.random() < params.zeta)
    return accepted, T, T_prime


def sample_paired(
    instance: LabelCoverInstance,
    edge_id: int,
    params: GadgetParams,
    top_sets: TopSets,
    rng: np.random.Generator,
) -> Tuple[SamplePoint, SamplePoint]:
    """Coupled (zero point, one point) on one edge.

    Subsets S_j, S'_j are common. A block whose top variable sits outside the
    subsets (or that has none) shares b_j and its noise. A block whose top
    variable lies in the subset shares only whether that variable carries an
    indicator and its slot; each side then draws the rest of the block from
    its own conditional law, the zero side by rejection. Each output is
    distributed exactly as ``sample_edge`` with a=0 and a=1.

    b_j is therefore not shared on blocks owned by a top set: the coupling
    only has to agree on the top variables and the noise, and drawing b_j
    per side given those keeps each marginal equal to its class law.
    """
    if not params.marginals_matched:
        raise ParameterError("coupling needs 1/(zeta(1-zeta)t) <= 1")
    edge = instance.edges[edge_id]
    owners = _top_owners(edge, top_sets)
    p = zero_point_acceptance(params)
    zeta, t, Q = params.zeta, params.t, params.Q

    shared: Tuple[Set[Bit], Set[Bit]] = (set(), set())
    own = [(set(), set()), (set(), set())]  # per class: (x, y)
    draws: List[List[BlockDraw]] = [[], []]

    def add_noise(target, side: str, vertices, j: int) -> None:
        pairs = [(v, i) for v in vertices for i in edge.preimage(v, j)]
        if not pairs:
            return
        rows, slots = np.nonzero(rng.integers(0, 2, size=(len(pairs), Q), dtype=np.uint8))
        bits = target[0] if side == "X" else target[1]
        bits.update((pairs[r][0], pairs[r][1], q) for r, q in zip(rows.tolist(), slots.tolist()))

    def add_indicators(target, side: str, vertex: int, j: int, fixed: Optional[Tuple[int, int]] = None) -> None:
        bits = target[0] if side == "X" else target[1]
        for i in edge.preimage(vertex, j):
            if fixed is not None and fixed[0] == i:
                bits.add((vertex, i, fixed[1]))
            else:
                bits.add((vertex, i, int(rng.integers(Q))))

    def noise_side(b: int, S, S_prime):
        if b == 0:
            return "X", [v for v in edge.ex if v not in S]
        return "Y", [v for v in edge.ey if v not in S_prime]

    for j in range(instance.m):
        S = _draw_subset(edge.ex, t, rng)
        S_prime = _draw_subset(edge.ey, t, rng)
        owner = owners.get(j)
        owner_side = edge.side(owner[0]) if owner else None
        inside = owner is not None and owner[0] in (S if owner_side == "X" else S_prime)

        if not inside:
            b = 0 if rng.random() < zeta else 1
            side, vertices = noise_side(b, S, S_prime)
            add_noise(shared, side, vertices, j)
            accepted, T, T_prime = _zero_part(b, S, S_prime, params, p, rng)
            for v in T:
                add_indicators(own[0], "X", v, j)
            for v in T_prime:
                add_indicators(own[0], "Y", v, j)
            u_x = S[int(rng.integers(t))]
            u_y = S_prime[int(rng.integers(t))]
            add_indicators(own[1], "X", u_x, j)
            add_indicators(own[1], "Y", u_y, j)
            draws[0].append(BlockDraw(j, b, S, S_prime, accepted=accepted, T=T, T_prime=T_prime, shared=True))
            draws[1].append(BlockDraw(j, b, S, S_prime, u_x=u_x, u_y=u_y, shared=True))
            continue

        owner_v, owner_i = owner
        fires = bool(rng.random() < 1.0 / t)
        fixed = (owner_i, int(rng.integers(Q))) if fires else None

        # one point: u on the owner's side is the owner exactly when the event fires
        b1 = 0 if rng.random() < zeta else 1
        owner_pool = S if owner_side == "X" else S_prime
        if fires:
            u_owner = owner_v
        else:
            others = [v for v in owner_pool if v != owner_v]
            u_owner = others[int(rng.integers(len(others)))]
        other_pool = S_prime if owner_side == "X" else S
        u_other = other_pool[int(rng.integers(t))]
        u_x, u_y = (u_owner, u_other) if owner_side == "X" else (u_other, u_owner)
        side, vertices = noise_side(b1, S, S_prime)
        add_noise(own[1], side, vertices, j)
        add_indicators(own[1], "X", u_x, j, fixed if u_x == owner_v and owner_side == "X" else None)
        add_indicators(own[1], "Y", u_y, j, fixed if u_y == owner_v and owner_side == "Y" else None)
        draws[1].append(BlockDraw(j, b1, S, S_prime, u_x=u_x, u_y=u_y))

        # zero point: rejection on the prior until the owner's indicator status matches
        while True:
            b0 = 0 if rng.random() < zeta else 1
            accepted, T, T_prime = _zero_part(b0, S, S_prime, params, p, rng)
            hit = owner_v in (T if owner_side == "X" else T_prime)
            if hit == fires:
                break
        side, vertices = noise_side(b0, S, S_prime)
        add_noise(own[0], side, vertices, j)
        for v in T:
            add_indicators(own[0], "X", v, j, fixed if v == owner_v and owner_side == "X" else None)
        for v in T_prime:
            add_indicators(own[0], "Y", v, j, fixed if v == owner_v and owner_side == "Y" else None)
        draws[0].append(BlockDraw(j, b0, S, S_prime, accepted=accepted, T=T, T_prime=T_prime))

    points = []
    for a in (0, 1):
        x = frozenset(shared[0] | own[a][0])
        y = frozenset(shared[1] | own[a][1])
        transcript = Transcript(a=a, edge_id=edge_id, blocks=tuple(draws[a]))
        points.append(SamplePoint(a, x, y, edge_id, transcript))
    return points[0], points[1]


# ── samplers and marginals ───────────────────────────────────────────────────


@dataclass(frozen=True)
class BasicSampler:
    M: int
    k: int

    def sample(self, rng: np.random.Generator) -> SamplePoint:
        return sample_basic_I(self.M, self.k, rng)


@dataclass(frozen=True)
class SimplifiedSampler:
    m: int
    d: int
    k: int
    Q: int
    zero_accept: Optional[float] = None

    def sample(self, rng: np.random.Generator) -> SamplePoint:
        return sample_simplified_D(self.m, self.d, self.k, self.Q, rng, self.zero_accept)


@dataclass(frozen=True)
class GlobalSampler:
    instance: LabelCoverInstance
    params: GadgetParams

    def sample(self, rng: np.random.Generator) -> SamplePoint:
        return sample_global(self.instance, self.params, rng)


@dataclass(frozen=True)
class EdgeSampler:
    """Restriction to one edge; ``a=None`` draws the label uniformly."""

    instance: LabelCoverInstance
    params: GadgetParams
    edge_id: int
    a: Optional[int] = None

    def sample(self, rng: np.random.Generator) -> SamplePoint:
        a = int(rng.integers(2)) if self.a is None else self.a
        return sample_edge(self.instance, self.params, self.edge_id, a, rng)


def _draw_range(sampler, seed: int, stream: int, start: int, stop: int) -> List[SamplePoint]:
    return [sampler.sample(point_rng(seed, index, stream)) for index in range(start, stop)]


def draw_points(sampler, n: int, seed: int, workers: int = 1, stream: str = "sample") -> List[SamplePoint]:
    """Point ``i`` always comes from stream (seed, stream, i)."""
    fn = partial(_draw_range, sampler, seed, stream_id(stream))
    points = map_chunks(fn, n, workers)
    logger.debug("drew %d points from %s", n, type(sampler).__name__)
    return points


@dataclass(frozen=True)
class CoordinateMarginal:
    coordinate: Coordinate
    mean_0: float
    mean_1: float
    n_0: int
    n_1: int
    z: float


def marginal_report(
    sampler, coordinates: Sequence[Coordinate], n: int, seed: int, workers: int = 1
) -> List[CoordinateMarginal]:
    """Class-conditional coordinate means with pooled two-sample z-scores."""
    if n < 1:
        raise ParameterError("n must be positive")
    points = draw_points(sampler, n, seed, workers, stream="marginals")
    return marginals_of(points, coordinates)


def marginals_of(points: Sequence[SamplePoint], coordinates: Sequence[Coordinate]) -> List[CoordinateMarginal]:
    totals = [0, 0]
    hits = {c: [0, 0] for c in coordinates}
    for point in points:
        totals[point.a] += 1
        for c in coordinates:
            side, v, i, q = c
            if (v, i, q) in (point.x if side == "X" else point.y):
                hits[c][point.a] += 1
    report = []
    for c in coordinates:
        m0 = hits[c][0] / totals[0] if totals[0] else 0.0
        m1 = hits[c][1] / totals[1] if totals[1] else 0.0
        report.append(CoordinateMarginal(c, m0, m1, totals[0], totals[1], two_proportion_z(m0, totals[0], m1, totals[1])))
    return report


def edge_coordinates(instance: LabelCoverInstance, params: GadgetParams) -> List[Coordinate]:
    """Every coordinate that some edge can set: X on e_X vertices, Y on e_Y vertices."""
    coordinates: Set[Coordinate] = set()
    for edge in instance.edges:
        for v in edge.ex:
            coordinates.update(("X", v, i, q) for i in range(instance.M) for q in range(params.Q))
        for v in edge.ey:
            coordinates.update(("Y", v, i, q) for i in range(instance.M) for q in range(params.Q))
    return sorted(coordinates)


@dataclass(frozen=True)
class AcceptanceReport:
    gate_rate: float
    gate_ci95: Tuple[float, float]
    gate_expected: float
    any_bits_rate: float
    any_bits_ci95: Tuple[float, float]
    any_bits_expected: float
    blocks: int


def acceptance_report(
    instance: LabelCoverInstance, params: GadgetParams, n: int, seed: int, workers: int = 1
) -> AcceptanceReport:
    """Zero-point gate frequency per block, and the frequency of blocks that carry indicator bits."""
    p = zero_point_acceptance(params)
    zeta, t = params.zeta, params.t
    points = draw_points(GlobalSampler(instance, params), n, seed, workers, stream="acceptance")
    gates = bits = blocks = 0
    for point in points:
        if point.a != 0:
            continue
        for blk in point.transcript.blocks:
            blocks += 1
            gates += blk.accepted
            bits += bool(blk.T or blk.T_prime)
    expected_bits = p * (zeta * (1.0 - zeta**t) + (1.0 - zeta) * (1.0 - (1.0 - zeta) ** t))
    gate = wilson(gates, blocks)
    carried = wilson(bits, blocks)
    return AcceptanceReport(
        gate.estimate, gate.ci95, p, carried.estimate, carried.ci95, expected_bits, blocks
    )
