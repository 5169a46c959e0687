"""Small-ball probabilities, Berry-Esseen gaps and the coupled-pair concentration checks."""
import logging
import math
from functools import partial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from hardnesslab.core.errors import BudgetError, HypothesisError, ParameterError, StructuralConditionError
from hardnesslab.core.parallel import map_chunks
from hardnesslab.core.rng import point_rng, stream_id
from hardnesslab.core.stats import (
    chebyshev_bound,
    dkw_threshold,
    loglog_slope,
    mean_ci,
    stderr,
    variance_ci,
    wilson,
)
from hardnesslab.models.block_vector import BlockVector
from hardnesslab.models.classifier import Halfspace, pos
from hardnesslab.models.label_cover import LabelCoverInstance
from hardnesslab.schemas.params import GadgetParams
from hardnesslab.schemas.report import CheckResult
from hardnesslab.services import critical_index as ci
from hardnesslab.services.gadget import sample_paired

logger = logging.getLogger("hardnesslab.anticonc")

MAX_EXACT_TERMS = 30
MAX_SUP_TERMS = 22
MAX_DP_ATOMS = 200_000
MAX_BLOCK_CELLS = 1 << 22

# fitted on unit-coefficient and lattice-block calibration families
LO_CONSTANT = 2.5
BLOCK_LO_CONSTANT = 2.5
BERRY_ESSEEN_CONSTANT = 0.56
DEVIATION_TAU_CONSTANT = 1.0
DEVIATION_Q_CONSTANT = 1.0

_LO_MIXED_STREAM = stream_id("anticonc.lo_mixed")
_BLOCK_SELECT_STREAM = stream_id("anticonc.block_select")
_BLOCK_HOLDOUT_STREAM = stream_id("anticonc.block_holdout")
_BE_STREAM = stream_id("anticonc.berry_esseen")
_NOISY_STREAM = stream_id("anticonc.noisy_mass")
_PAIRED_STREAM = stream_id("anticonc.paired")


def _tolerance(a: np.ndarray, theta: float, radius: float) -> float:
    return 8.0 * np.finfo(float).eps * (float(np.abs(a).sum()) + abs(theta) + abs(radius) + 1.0)


def _subset_sums(a: np.ndarray) -> np.ndarray:
    sums = np.zeros(1)
    for x in a:
        sums = np.concatenate([sums, sums + x])
    return sums


# ── Littlewood-Offord ────────────────────────────────────────────────────────


def lo_exact(a: Sequence[float], theta: float, radius: float) -> float:
    """Pr[|sum a_i x_i + theta| <= radius] for iid fair bits x_i, by meet in the middle."""
    coeffs = np.asarray(a, dtype=float)
    n = coeffs.size
    if n > MAX_EXACT_TERMS:
        raise BudgetError(f"exact small-ball probability is limited to n <= {MAX_EXACT_TERMS}, got {n}")
    if radius < 0:
        raise ParameterError("radius must be non-negative")
    atol = _tolerance(coeffs, theta, radius)
    left = _subset_sums(coeffs[: n // 2])
    right = np.sort(_subset_sums(coeffs[n // 2 :]))
    low = np.searchsorted(right, -radius - theta - left - atol, side="left")
    high = np.searchsorted(right, radius - theta - left + atol, side="right")
    return int((high - low).sum()) / 2.0**n


def lo_exact_sup(a: Sequence[float], radius: float) -> Tuple[float, float]:
    """sup over theta of the small-ball probability and a maximising theta."""
    coeffs = np.asarray(a, dtype=float)
    if coeffs.size > MAX_SUP_TERMS:
        raise BudgetError(f"exact supremum is limited to n <= {MAX_SUP_TERMS}, got {coeffs.size}")
    sums = np.sort(_subset_sums(coeffs))
    atol = _tolerance(coeffs, 0.0, radius)
    ends = np.searchsorted(sums, sums + 2.0 * radius + atol, side="right")
    counts = ends - np.arange(sums.size)
    best = int(np.argmax(counts))
    theta = -(sums[best] + sums[ends[best] - 1]) / 2.0
    return int(counts[best]) / 2.0**coeffs.size, float(theta)


def central_mass(n: int, radius: float = 1.0) -> float:
    """sup_theta Pr[|S + theta| <= radius] for S ~ Binomial(n, 1/2)."""
    width = int(math.floor(2.0 * radius)) + 1
    pmf = stats.binom.pmf(np.arange(n + 1), n, 0.5)
    windows = np.convolve(pmf, np.ones(width), mode="valid") if width <= n + 1 else np.array([pmf.sum()])
    return float(windows.max())


def _window_sup(values: np.ndarray, radius: float) -> int:
    values = np.sort(values)
    ends = np.searchsorted(values, values + 2.0 * radius + 1e-12 * (1.0 + np.abs(values)), side="right")
    return int((ends - np.arange(values.size)).max()) if values.size else 0


def lo_scaling_check(
    n_values: Sequence[int], trials: int = 0, seed: int = 0, radius: float = 1.0
) -> CheckResult:
    """Decay exponent of the unit-coefficient central mass; optional mixed-coefficient MC."""
    if len(n_values) < 2:
        raise ParameterError("need at least two values of n to fit a slope")
    masses = [central_mass(n, radius) for n in n_values]
    slope, constant = loglog_slope(n_values, masses)
    passed = -0.6 <= slope <= -0.4
    details: Dict = {"n_values": list(n_values), "central_mass": masses, "fitted_constant": constant}

    if trials > 0:
        mixed = []
        for n in n_values:
            rng = point_rng(seed, n, _LO_MIXED_STREAM)
            coeffs = rng.uniform(1.0, 2.0, size=n) * rng.choice([-1.0, 1.0], size=n)
            values = np.empty(trials)
            for start in range(0, trials, 1024):
                stop = min(start + 1024, trials)
                values[start:stop] = rng.integers(0, 2, size=(stop - start, n)) @ coeffs
            estimate = wilson(_window_sup(values, radius), trials)
            envelope = constant / math.sqrt(n)
            mixed.append({"n": n, "estimate": estimate.estimate, "ci95": estimate.ci95, "bound": envelope})
            passed = passed and estimate.low <= envelope
        details["mixed"] = mixed
    logger.info("small-ball decay slope %.3f over %d sizes", slope, len(n_values))
    return CheckResult(
        name="lo_scaling",
        estimate=slope,
        bound=-0.5,
        passed=passed,
        trials=trials or None,
        details=details,
    )


# ── block small-ball ─────────────────────────────────────────────────────────


def _block_values(coeffs: np.ndarray, seed: int, stream: int, start: int, stop: int) -> List[float]:
    rng = point_rng(seed, start, stream)
    bits = rng.integers(0, 2, size=(stop - start,) + coeffs.shape, dtype=np.uint8)
    return np.einsum("ntq,tq->n", bits, coeffs).tolist()


def block_lo_mc(
    blocks: Sequence[Sequence[float]],
    trials: int,
    seed: int,
    workers: int = 1,
    radius: Optional[float] = None,
) -> CheckResult:
    """Held-out estimate of the block small-ball probability at a selected theta.

    theta is chosen on one half of the trials as the centre of the fullest
    window of width 2*radius, then the probability is estimated on the other
    half. ``radius`` defaults to ||c_T||/sqrt(T).
    """
    coeffs = np.asarray(blocks, dtype=float)
    if coeffs.ndim != 2 or coeffs.shape[0] < 1:
        raise ParameterError("blocks must be a non-empty list of equal-length vectors")
    norms = np.linalg.norm(coeffs, axis=1)
    if np.any(np.diff(norms) > 1e-12 * max(1.0, float(norms[0]))):
        raise ParameterError("blocks must be sorted by descending norm")
    if trials < 2:
        raise ParameterError("need at least two trials")
    T = coeffs.shape[0]
    radius = float(norms[-1]) / math.sqrt(T) if radius is None else radius
    chunk = max(1, MAX_BLOCK_CELLS // coeffs.size)

    select_n = trials // 2
    holdout_n = trials - select_n
    selection = np.asarray(
        map_chunks(partial(_block_values, coeffs, seed, _BLOCK_SELECT_STREAM), select_n, workers, chunk)
    )
    ordered = np.sort(selection)
    ends = np.searchsorted(ordered, ordered + 2.0 * radius, side="right")
    best = int(np.argmax(ends - np.arange(ordered.size)))
    theta = -(ordered[best] + ordered[ends[best] - 1]) / 2.0

    holdout = np.asarray(
        map_chunks(partial(_block_values, coeffs, seed, _BLOCK_HOLDOUT_STREAM), holdout_n, workers, chunk)
    )
    atol = _tolerance(coeffs.ravel(), theta, radius)
    hits = int(np.count_nonzero(np.abs(holdout + theta) <= radius + atol))
    estimate = wilson(hits, holdout_n)
    bound = BLOCK_LO_CONSTANT / math.sqrt(T)
    return CheckResult(
        name="block_lo",
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        bound_vacuous=bound >= 1.0,
        passed=estimate.low <= bound,
        trials=trials,
        details={"theta": float(theta), "radius": radius, "T": T, "Q": coeffs.shape[1]},
    )


def lattice_blocks(T: int, Q: int) -> np.ndarray:
    """T copies of the first unit vector of R^Q: the extremal block family."""
    blocks = np.zeros((T, Q))
    blocks[:, 0] = 1.0
    return blocks


def block_lo_scaling(T_values: Sequence[int], Q: int, trials: int, seed: int, workers: int = 1) -> CheckResult:
    estimates = [
        block_lo_mc(lattice_blocks(T, Q), trials, seed, workers).estimate for T in T_values
    ]
    slope, constant = loglog_slope(T_values, estimates)
    return CheckResult(
        name="block_lo_scaling",
        estimate=slope,
        bound=-0.5,
        passed=-0.65 <= slope <= -0.35,
        trials=trials,
        details={"T_values": list(T_values), "estimates": estimates, "fitted_constant": constant},
    )


# ── Berry-Esseen ─────────────────────────────────────────────────────────────


def _normalised_atoms(atoms: Sequence[Tuple[float, float]], n: int) -> Tuple[np.ndarray, np.ndarray, float]:
    values = np.array([v for v, _ in atoms], dtype=float)
    probs = np.array([p for _, p in atoms], dtype=float)
    if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-9):
        raise ParameterError("atom probabilities must be non-negative and sum to 1")
    mean = float(probs @ values)
    variance = float(probs @ (values - mean) ** 2)
    if variance <= 0.0:
        raise ParameterError("distribution has zero variance")
    scaled = (values - mean) / math.sqrt(variance * n)
    gamma = n * float(probs @ np.abs(scaled) ** 3)
    return scaled, probs, gamma


def _sum_distribution(values: np.ndarray, probs: np.ndarray, n: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    support = np.zeros(1)
    weights = np.ones(1)
    for _ in range(n):
        grid = (support[:, None] + values[None, :]).ravel()
        mass = (weights[:, None] * probs[None, :]).ravel()
        keys = np.round(grid, 12)
        support, inverse = np.unique(keys, return_inverse=True)
        weights = np.bincount(inverse, weights=mass)
        if support.size > MAX_DP_ATOMS:
            return None
    return support, weights


def berry_esseen_gap(
    atoms: Sequence[Tuple[float, float]],
    n: int,
    trials: int = 100_000,
    seed: int = 0,
) -> CheckResult:
    """sup_x |F(x) - Phi(x)| for the normalised sum of n iid copies of an atomic variable.

    Exact over the atoms of the sum while the support stays small, otherwise
    the empirical CDF of ``trials`` draws with a DKW band.
    """
    if n < 1:
        raise ParameterError("n must be positive")
    values, probs, gamma = _normalised_atoms(atoms, n)
    exact = _sum_distribution(values, probs, n)
    if exact is not None:
        support, weights = exact
        cdf = np.minimum(np.cumsum(weights), 1.0)
        left = np.concatenate([[0.0], cdf[:-1]])
        phi = stats.norm.cdf(support)
        gap = float(max(np.abs(cdf - phi).max(), np.abs(left - phi).max()))
        band = (gap, gap)
        method = "exact"
    else:
        rng = point_rng(seed, 0, _BE_STREAM)
        draws = np.zeros(trials)
        for _ in range(n):
            draws += rng.choice(values, size=trials, p=probs)
        draws.sort()
        phi = stats.norm.cdf(draws)
        upper = np.arange(1, trials + 1) / trials
        lower = np.arange(trials) / trials
        gap = float(max(np.abs(upper - phi).max(), np.abs(lower - phi).max()))
        eps = dkw_threshold(trials)
        band = (max(0.0, gap - eps), min(1.0, gap + eps))
        method = "empirical"
    gap = min(max(gap, 0.0), 1.0)
    bound = BERRY_ESSEEN_CONSTANT * gamma
    return CheckResult(
        name="berry_esseen",
        estimate=gap,
        ci95=band,
        bound=bound,
        bound_vacuous=bound >= 1.0,
        passed=band[0] <= bound,
        trials=None if method == "exact" else trials,
        details={"gamma": gamma, "n": n, "method": method},
    )


# ── coupled-pair checks ──────────────────────────────────────────────────────


def _noisy_masses(
    weights: np.ndarray,
    is_x: np.ndarray,
    positions: np.ndarray,
    zeta: float,
    t: int,
    k: int,
    seed: int,
    start: int,
    stop: int,
) -> List[List[float]]:
    rng = point_rng(seed, start, _NOISY_STREAM)
    n = stop - start
    m = weights.shape[1]
    b = rng.random((n, m)) >= zeta
    # a uniform t-subset per side and block: the t smallest of k uniforms
    ranks_x = np.argsort(np.argsort(rng.random((n, m, k)), axis=2), axis=2)
    ranks_y = np.argsort(np.argsort(rng.random((n, m, k)), axis=2), axis=2)
    masses = np.zeros((n, weights.shape[0]))
    for row in range(weights.shape[0]):
        if is_x[row]:
            good = ~b & (ranks_x[:, :, positions[row]] >= t)
        else:
            good = b & (ranks_y[:, :, positions[row]] >= t)
        masses[:, row] = good @ weights[row]
    return masses.tolist()


def noisy_mass_concentration(
    instance: LabelCoverInstance,
    edge_id: int,
    params: GadgetParams,
    blockvecs: Mapping[int, BlockVector],
    trials: int,
    seed: int,
    workers: int = 1,
    split: bool = False,
) -> CheckResult:
    """Frequency with which the noisy regular mass of a vertex falls strictly below (zeta/8)||c^reg||^2.

    ``blockvecs`` are the regular parts per vertex unless ``split`` asks for
    the top blocks and their projections to be removed first.
    """
    edge = instance.edges[edge_id]
    unknown = set(blockvecs) - set(edge.vertices)
    if unknown:
        raise ParameterError(f"vertices {sorted(unknown)} are not on edge {edge_id}")
    part = ci.regular_part(instance, edge_id, blockvecs, params, split=split)
    vertices = sorted(blockvecs)
    weights = np.zeros((len(vertices), instance.m))
    for row, v in enumerate(vertices):
        c = blockvecs[v]
        for i in part.reg_labels[v]:
            weights[row, edge.project(v, i)] += float(c.norm_sq(i))
    is_x = np.array([edge.side(v) == "X" for v in vertices])
    positions = np.array(
        [edge.ex.index(v) if edge.side(v) == "X" else edge.ey.index(v) for v in vertices], dtype=np.int64
    )
    masses = np.asarray(
        map_chunks(
            partial(_noisy_masses, weights, is_x, positions, params.zeta, params.t, edge.k, seed),
            trials,
            workers,
        )
    ).reshape(trials, len(vertices))
    thresholds = np.array([params.zeta / 8.0 * part.reg_mass[v] for v in vertices])
    short = masses < thresholds[None, :]

    per_vertex = {}
    for row, v in enumerate(vertices):
        freq = wilson(int(short[:, row].sum()), trials)
        per_vertex[v] = {
            "estimate": freq.estimate,
            "ci95": freq.ci95,
            "reg_mass": part.reg_mass[v],
            "alpha": part.alpha[v],
        }
    worst = max(vertices, key=lambda v: per_vertex[v]["estimate"]) if vertices else None
    estimate = wilson(int(short[:, vertices.index(worst)].sum()), trials) if worst is not None else wilson(0, trials)
    bound = math.exp(-(params.zeta**2) / (64.0 * params.tau))
    logger.info("noisy-mass shortfall %.5f (bound %.3g)", estimate.estimate, bound)
    return CheckResult(
        name="noisy_mass",
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        bound_vacuous=bound >= 1.0,
        passed=estimate.low <= bound,
        trials=trials,
        details={
            "worst_vertex": worst,
            "per_vertex": per_vertex,
            "any_vertex": wilson(int(short.any(axis=1).sum()), trials).estimate,
            "union_bound": min(1.0, 2 * edge.k * bound),
        },
    )


def own_side_blockvecs(instance: LabelCoverInstance, edge_id: int, h: Halfspace) -> Dict[int, BlockVector]:
    edge = instance.edges[edge_id]
    return {v: ci.block_vector(h, edge.side(v), v, instance.M) for v in edge.vertices}


def _require_lemma_hypotheses(instance: LabelCoverInstance, edge_id: int, h: Halfspace, params: GadgetParams) -> None:
    edge = instance.edges[edge_id]
    if not ci.is_truncated(h, edge, params.tau, params.K):
        raise HypothesisError("halfspace is not truncated on this edge; run truncate first")
    ci.require_nice(instance, edge_id, [h], params.tau, params.K)


def _paired_values(instance, edge_id, params, h, tops, seed: int, start: int, stop: int) -> List[Tuple[float, float]]:
    out = []
    for index in range(start, stop):
        p0, p1 = sample_paired(instance, edge_id, params, tops, point_rng(seed, index, _PAIRED_STREAM))
        out.append((float(h.value(p0)), float(h.value(p1))))
    return out


def _paired_draws(instance, edge_id, params, h, trials, seed, workers) -> np.ndarray:
    edge = instance.edges[edge_id]
    tops = ci.top_sets(edge, [h], params.tau, params.K)
    pairs = map_chunks(partial(_paired_values, instance, edge_id, params, h, tops, seed), trials, workers)
    return np.asarray(pairs, dtype=float).reshape(trials, 2)


def variance_diff_mc(
    instance: LabelCoverInstance,
    edge_id: int,
    params: GadgetParams,
    h: Halfspace,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CheckResult:
    """Var[h(X1,Y1) - h(X0,Y0)] under the coupled pair against 2||c^reg||^2/sqrt(Q)."""
    _require_lemma_hypotheses(instance, edge_id, h, params)
    part = ci.regular_part(instance, edge_id, own_side_blockvecs(instance, edge_id, h), params)
    reg_mass = math.fsum(part.reg_mass.values())
    values = _paired_draws(instance, edge_id, params, h, trials, seed, workers)
    diffs = values[:, 1] - values[:, 0]
    var, low, high = variance_ci(diffs)
    mean, _, _ = mean_ci(diffs)
    se = stderr(diffs)
    bound = 2.0 * reg_mass / math.sqrt(params.Q)
    eps0 = params.tau * math.sqrt(params.zeta) * math.sqrt(reg_mass) / 64.0
    return CheckResult(
        name="variance_diff",
        estimate=var,
        ci95=(low, high),
        bound=bound,
        bound_vacuous=False,
        passed=low <= bound,
        trials=trials,
        details={
            "mean_diff": mean,
            "mean_stderr": se,
            "mean_zero": abs(mean) <= 4.0 * se if se > 0 else mean == 0.0,
            "reg_mass": reg_mass,
            "epsilon0": eps0,
            "chebyshev": chebyshev_bound(var, eps0) if eps0 > 0 else 1.0,
        },
    )


def deviation_bound(params: GadgetParams) -> float:
    tau, zeta = params.tau, params.zeta
    return (
        DEVIATION_TAU_CONSTANT * tau
        + 2 * params.k * math.exp(-(zeta**2) / (64.0 * tau))
        + DEVIATION_Q_CONSTANT / (tau**2 * zeta * math.sqrt(params.Q))
    )


def pointwise_deviation_mc(
    instance: LabelCoverInstance,
    edge_id: int,
    params: GadgetParams,
    h: Halfspace,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CheckResult:
    """E|pos(h(X1,Y1)) - pos(h(X0,Y0))| under the coupled pair; refuses when a decoding condition fires."""
    _require_lemma_hypotheses(instance, edge_id, h, params)
    conditions = ci.structural_conditions(instance, edge_id, [h], params.tau, params.K)
    if conditions.condition_I:
        raise StructuralConditionError("condition I fires on this edge", witness=conditions.first_I)
    if conditions.condition_II:
        raise StructuralConditionError("condition II fires on this edge", witness=conditions.first_II)
    values = _paired_draws(instance, edge_id, params, h, trials, seed, workers)
    flips = sum(pos(v0) != pos(v1) for v0, v1 in values.tolist())
    estimate = wilson(flips, trials)
    bound = deviation_bound(params)
    return CheckResult(
        name="pointwise_deviation",
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        bound_vacuous=bound >= 1.0,
        passed=estimate.low <= bound,
        trials=trials,
        details={
            "tau_constant": DEVIATION_TAU_CONSTANT,
            "q_constant": DEVIATION_Q_CONSTANT,
        },
    )
