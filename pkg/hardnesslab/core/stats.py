import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class Proportion:
    successes: int
    n: int
    low: float
    high: float

    @property
    def estimate(self) -> float:
        return self.successes / self.n if self.n else 0.0

    @property
    def stderr(self) -> float:
        if not self.n:
            return 0.0
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.n)

    @property
    def ci95(self) -> Tuple[float, float]:
        return (self.low, self.high)


def wilson(successes: int, n: int, confidence: float = 0.95) -> Proportion:
    if n <= 0:
        return Proportion(0, 0, 0.0, 1.0)
    interval = stats.binomtest(int(successes), int(n)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return Proportion(int(successes), int(n), float(interval.low), float(interval.high))


def mean_ci(values: Sequence[float], z: float = 1.96) -> Tuple[float, float, float]:
    """Mean with a normal-approximation interval; returns (mean, low, high)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0, 0.0, 0.0
    mean = math.fsum(arr) / arr.size
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, mean - z * se, mean + z * se


def stderr(values: Sequence[float]) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return 0.0
    return float(arr.std(ddof=1) / math.sqrt(arr.size))


def variance_ci(values: Sequence[float], z: float = 1.96) -> Tuple[float, float, float]:
    """Sample variance with a fourth-moment (asymptotic) interval."""
    arr = np.asarray(values, dtype=float)
    n = arr.size
    if n < 2:
        return 0.0, 0.0, 0.0
    centered = arr - arr.mean()
    var = float(math.fsum(centered**2) / (n - 1))
    m4 = float(math.fsum(centered**4) / n)
    se = math.sqrt(max(m4 - var**2, 0.0) / n)
    return var, max(var - z * se, 0.0), var + z * se


def two_proportion_z(mean_0: float, n_0: int, mean_1: float, n_1: int) -> float:
    """Pooled two-sample z statistic for Bernoulli means; 0 when both samples are constant and equal."""
    if n_0 == 0 or n_1 == 0:
        return 0.0
    pooled = (mean_0 * n_0 + mean_1 * n_1) / (n_0 + n_1)
    var = pooled * (1.0 - pooled) * (1.0 / n_0 + 1.0 / n_1)
    if var <= 0.0:
        return 0.0 if mean_0 == mean_1 else math.inf
    return (mean_1 - mean_0) / math.sqrt(var)


def ks_two_sample(sample_a: Sequence[float], sample_b: Sequence[float]) -> Tuple[float, float]:
    result = stats.ks_2samp(np.asarray(sample_a), np.asarray(sample_b))
    return float(result.statistic), float(result.pvalue)


def dkw_threshold(n: int, alpha: float = 1e-3) -> float:
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def dkw_two_sample_threshold(n_a: int, n_b: int, alpha: float = 1e-3) -> float:
    return math.sqrt(math.log(2.0 / alpha) * (n_a + n_b) / (2.0 * n_a * n_b))


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Least-squares fit of log y = slope·log x + log C; returns (slope, C)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(math.exp(intercept))


def hoeffding_bound(n: int, deviation: float, value_range: float = 1.0) -> float:
    """Two-sided Hoeffding tail for a mean of n variables in an interval of the given width."""
    if n <= 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-2.0 * n * deviation**2 / value_range**2))


def chernoff_lower_bound(mean: float, delta: float) -> float:
    """Multiplicative Chernoff tail Pr[S ≤ (1−δ)μ] ≤ exp(−δ²μ/2)."""
    return min(1.0, math.exp(-(delta**2) * mean / 2.0))


def chebyshev_bound(variance: float, deviation: float) -> float:
    if deviation <= 0:
        return 1.0
    return min(1.0, variance / deviation**2)
