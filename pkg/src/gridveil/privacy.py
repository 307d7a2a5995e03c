"""Adversarial distinguishability of two consumption hypotheses.

An adversary observes the aggregate signal and must decide which of two mean
traces produced it, under isotropic Gaussian noise and equal priors.  The
closed-form success ceiling for any estimator is

    P(success) = (1/2) * (1 + erf(||mu1 - mu2|| / (2 * sigma * sqrt(2))))

and the optimal test achieving it is the likelihood-ratio sign rule
``a.x + b > 0`` with ``a = (mu1 - mu2)/sigma^2`` and
``b = (||mu2||^2 - ||mu1||^2)/(2 sigma^2)``.  The Monte Carlo oracle here
simulates exactly that rule, providing an independent check of the formula.

Subsampled metering thins the observed trace, shrinking ||mu1 - mu2|| and
with it the adversary's edge; ``breach_curve`` quantifies that decay against
the sampling interval.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError
from .numerics import erf

_LARGEST_BELOW_ONE = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class GaussianHypothesisPair:
    """Two candidate mean traces (watts per sample) under shared noise sigma."""

    mu1: np.ndarray
    mu2: np.ndarray
    sigma: float

    def __init__(self, mu1, mu2, sigma):
        mu1 = np.asarray(mu1, dtype=np.float64)
        mu2 = np.asarray(mu2, dtype=np.float64)
        if mu1.ndim != 1 or mu2.ndim != 1:
            raise DomainError("mean traces must be 1-D")
        if mu1.size == 0:
            raise DomainError("mean traces must have length >= 1")
        if mu1.shape != mu2.shape:
            raise DomainError(
                f"mean traces must have equal length, got {mu1.size} and {mu2.size}")
        if not (np.all(np.isfinite(mu1)) and np.all(np.isfinite(mu2))):
            raise DomainError("mean traces must be finite")
        sigma = float(sigma)
        if not (math.isfinite(sigma) and sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {sigma}")
        object.__setattr__(self, "mu1", mu1)
        object.__setattr__(self, "mu2", mu2)
        object.__setattr__(self, "sigma", sigma)

    def __len__(self):
        return self.mu1.size

    def classifier(self):
        """Optimal rule coefficients (a, b): decide hypothesis 1 iff a.x + b > 0."""
        s2 = self.sigma * self.sigma
        a = (self.mu1 - self.mu2) / s2
        ssq1 = 0.0
        ssq2 = 0.0
        for j in range(self.mu1.size):
            ssq1 += self.mu1[j] * self.mu1[j]
            ssq2 += self.mu2[j] * self.mu2[j]
        b = (ssq2 - ssq1) / (2.0 * s2)
        return a, b


@dataclass(frozen=True)
class SamplingPolicy:
    """Keep every ``interval``-th sample starting at ``phase``."""

    interval: int
    phase: int = 0

    def __post_init__(self):
        if self.interval < 1:
            raise DomainError(f"interval must be >= 1, got {self.interval}")
        if not 0 <= self.phase < self.interval:
            raise DomainError(
                f"phase must lie in [0, {self.interval}), got {self.phase}")


@dataclass(frozen=True)
class BreachCurvePoint:
    interval: int
    success_prob: float
    failure_prob: float


def breach_success_probability(pair):
    """Probability ceiling for correctly distinguishing the two hypotheses.

    Always in [1/2, 1): 1/2 for identical traces, approaching (never
    reaching) 1 as separation/noise ratio grows; saturated separations
    return the largest double below 1.
    """
    gap = float(np.linalg.norm(pair.mu1 - pair.mu2))
    p = 0.5 * (1.0 + erf(gap / (2.0 * pair.sigma * math.sqrt(2.0))))
    return min(p, _LARGEST_BELOW_ONE)


def subsample_trace(trace, policy):
    """Entries at indices phase, phase+N, phase+2N, ...; errors if empty."""
    trace = np.asarray(trace, dtype=np.float64)
    if trace.ndim != 1 or trace.size == 0:
        raise DomainError("trace must be a non-empty 1-D vector")
    if policy.phase >= trace.size:
        raise DomainError(
            f"phase {policy.phase} >= trace length {trace.size}: empty output")
    return trace[policy.phase::policy.interval].copy()


def breach_curve(pair, intervals):
    """Success/failure probabilities after equidistant thinning, per interval.

    Applies phase-0 subsampling to both mean traces (noise per kept sample is
    unchanged) and evaluates the closed form.  Output order follows input.
    """
    if len(intervals) == 0:
        raise DomainError("intervals must be non-empty")
    horizon = len(pair)
    points = []
    for n in intervals:
        n = int(n)
        if not 1 <= n < horizon:
            raise DomainError(
                f"interval {n} must satisfy 1 <= N < trace length {horizon}")
        policy = SamplingPolicy(interval=n, phase=0)
        thin = GaussianHypothesisPair(
            subsample_trace(pair.mu1, policy),
            subsample_trace(pair.mu2, policy),
            pair.sigma,
        )
        success = breach_success_probability(thin)
        points.append(BreachCurvePoint(
            interval=n, success_prob=success, failure_prob=1.0 - success))
    return points


def most_vulnerable_success(pairs):
    """Scenario-level breach probability: worst case over hypothesis pairs."""
    if not pairs:
        raise DomainError("at least one hypothesis pair is required")
    return max(breach_success_probability(p) for p in pairs)


def monte_carlo_success(pair, trials, seed):
    """Empirical success rate of the optimal likelihood-ratio classifier.

    Per trial the true input is drawn uniformly from the two hypotheses, an
    observation is sampled from the matching Gaussian, and the sign rule is
    scored.  Deterministic given ``seed``; trials are laid out on a counter
    stream so any sharding yields the identical count.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    a, b = pair.classifier()
    successes = _kernels.mc_success_count(
        seed & _kernels.MASK64, pair.mu1, pair.mu2, pair.sigma, a, b,
        int(trials), 0)
    return successes / float(trials)
