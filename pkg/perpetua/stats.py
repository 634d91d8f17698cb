"""Streaming moments and Monte Carlo comparison helpers."""

import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class RunningMoments:
    """Mergeable count, mean and sum of squared deviations."""

    def __init__(self, count: int = 0, mean: float = 0.0, m2: float = 0.0):
        self.count = count
        self.mean = mean
        self.m2 = m2

    @classmethod
    def from_values(cls, values: Iterable[float]) -> 'RunningMoments':
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                            dtype=float)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(int(values.size), mean, float(((values - mean) ** 2).sum()))

    def merge(self, other: 'RunningMoments') -> 'RunningMoments':
        if other.count == 0:
            return RunningMoments(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningMoments(other.count, other.mean, other.m2)
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return RunningMoments(count, mean, m2)

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)

    @property
    def std_error(self) -> float:
        if self.count == 0:
            return math.nan
        return math.sqrt(self.variance / self.count)

    def __repr__(self):
        return f'RunningMoments(count={self.count}, mean={self.mean}, m2={self.m2})'


def merge_all(parts: Iterable[RunningMoments]) -> RunningMoments:
    total = RunningMoments()
    for part in parts:
        total = total.merge(part)
    return total


def z_score(estimate: float, std_error: float, target: float) -> float:
    """Standardized distance; an exact match with zero error scores 0."""
    delta = estimate - target
    if abs(delta) <= 1e-12 * max(1.0, abs(target)):
        return 0.0
    if std_error == 0 or math.isnan(std_error):
        return math.copysign(math.inf, delta)
    return delta / std_error


class BatchSpread(NamedTuple):
    batch_means: tuple
    spread: float
    pooled_std_error: float
    stable: bool


def batch_spread(values: Sequence[float], n_batches: int = 4, factor: float = 10.0) -> BatchSpread:
    """Compare the means of `n_batches` disjoint contiguous batches. The
    estimate is flagged unstable when their spread exceeds `factor` times the
    standard error of the pooled mean.
    """
    values = np.asarray(values, dtype=float)
    batches = np.array_split(values, n_batches)
    means = tuple(float(b.mean()) for b in batches if b.size)
    pooled = RunningMoments.from_values(values).std_error
    spread = max(means) - min(means) if means else 0.0
    stable = spread <= factor * pooled if pooled > 0 else spread == 0
    return BatchSpread(means, spread, pooled, bool(stable))
