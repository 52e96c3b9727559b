"""Peak-to-ripple, peak-to-jammer, MSE/PFA and empirical CDFs for recovered vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrialMetrics:
    prr_per_target: list
    pjr: float
    mse: float
    pfa: float
    detected_support: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if any(p < 0 for p in self.prr_per_target) or self.pjr < 0:
            raise ValueError("PRR and PJR must be nonnegative")
        if not 0.0 <= self.pfa <= 1.0:
            raise ValueError("PFA must lie in [0, 1]")


def _check_indices(n, target_indices, jammer_index=None):
    targets = [int(i) for i in target_indices]
    for i in targets + ([] if jammer_index is None else [int(jammer_index)]):
        if not 0 <= i < n:
            raise IndexError(f"index {i} outside grid of size {n}")
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate target indices")
    if jammer_index is not None and int(jammer_index) in targets:
        raise ValueError("jammer index overlaps a target index")
    return targets


def prr(estimate, target_indices, jammer_index=None) -> list:
    """Peak-to-ripple ratio per target.

    The ripple is the energy left after removing every target entry and the
    jammer entry. A ripple of zero (or negative from rounding) gives +inf.
    """
    s = np.asarray(estimate)
    targets = _check_indices(s.size, target_indices, jammer_index)
    power = np.abs(s) ** 2
    ripple = float(np.sum(power) - np.sum(power[targets]))
    if jammer_index is not None:
        ripple -= float(power[int(jammer_index)])
    if ripple <= 0:
        return [np.inf for _ in targets]
    return [float(power[i]) / ripple for i in targets]


def pjr(estimate, target_indices, jammer_index) -> float:
    """Mean target peak power over the jammer-cell power; +inf when the jammer cell is zero."""
    s = np.asarray(estimate)
    targets = _check_indices(s.size, target_indices, jammer_index)
    jam = float(np.abs(s[int(jammer_index)]) ** 2)
    if jam == 0:
        return np.inf
    return float(np.mean(np.abs(s[targets]) ** 2)) / jam


def binarize(estimate, tau: float) -> np.ndarray:
    """Indicator of |s_n| >= tau * max|s| (all zeros for a zero estimate)."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    mag = np.abs(np.asarray(estimate))
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return np.zeros(mag.shape, dtype=int)
    return (mag >= tau * peak).astype(int)


def mse_pfa(estimate, truth_support, tau: float = 0.5):
    """(MSE, PFA) of the thresholded estimate against the target indicator vector."""
    b = binarize(estimate, tau)
    n = b.size
    t = np.zeros(n, dtype=int)
    support = [int(i) for i in truth_support]
    t[support] = 1
    mse = float(np.sum((b - t) ** 2)) / n
    negatives = n - len(set(support))
    false_pos = int(np.sum((b == 1) & (t == 0)))
    pfa = false_pos / negatives if negatives else 0.0
    return mse, float(pfa)


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step function: F(x) = fraction of samples <= x."""

    values: np.ndarray
    probabilities: np.ndarray

    def __call__(self, x) -> np.ndarray:
        idx = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")
        probs = np.concatenate([[0.0], self.probabilities])
        return probs[idx]

    def rows(self):
        return list(zip(self.values.tolist(), self.probabilities.tolist()))


def empirical_cdf(samples) -> EmpiricalCdf:
    """Steps at each distinct sample; +inf sentinels sort above every finite value."""
    x = np.asarray(list(samples), dtype=float)
    if x.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    if np.any(np.isnan(x)):
        raise ValueError("samples must not contain NaN")
    x = np.sort(x)
    uniq, counts = np.unique(x, return_counts=True)
    return EmpiricalCdf(uniq, np.cumsum(counts) / x.size)
