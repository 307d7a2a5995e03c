"""Distinguishability bounds against the Monte Carlo classifier oracle."""

import math

import numpy as np
import pytest

from gridveil.errors import DomainError
from gridveil.privacy import (
    BreachCurvePoint,
    GaussianHypothesisPair,
    SamplingPolicy,
    breach_curve,
    breach_success_probability,
    monte_carlo_success,
    most_vulnerable_success,
    subsample_trace,
)


def _pair(mu1, mu2, sigma):
    return GaussianHypothesisPair(np.asarray(mu1, float),
                                  np.asarray(mu2, float), sigma)


class TestClosedForm:
    def test_identical_means_is_coin_flip(self):
        assert breach_success_probability(_pair([1, 2, 3], [1, 2, 3], 0.5)) == 0.5

    def test_unit_example_matches_monte_carlo(self):
        # frozen from the optimal-classifier simulation; the closed form at
        # ||d mu|| = 2, sigma = 1 is the normal CDF at 1
        p = breach_success_probability(_pair([1, 1, 1, 1], [0, 0, 0, 0], 1.0))
        assert abs(p - 0.8413) <= 5e-5
        mc = monte_carlo_success(_pair([1, 1, 1, 1], [0, 0, 0, 0], 1.0),
                                 10 ** 6, seed=123)
        assert abs(mc - p) <= 4.0 * math.sqrt(p * (1 - p) / 10 ** 6)

    def test_noise_dominates(self):
        p = breach_success_probability(_pair([1, 1, 1, 1], [0, 0, 0, 0], 1e6))
        assert abs(p - 0.5) <= 1e-6

    def test_range_half_to_one(self, rng):
        for _ in range(200):
            dim = int(rng.integers(1, 12))
            pair = _pair(rng.normal(0, 5, dim), rng.normal(0, 5, dim),
                         float(rng.uniform(1e-4, 10)))
            p = breach_success_probability(pair)
            assert 0.5 <= p < 1.0

    def test_noise_monotonicity(self, rng):
        for _ in range(100):
            dim = int(rng.integers(1, 8))
            mu1, mu2 = rng.normal(0, 2, dim), rng.normal(0, 2, dim)
            s1 = float(rng.uniform(0.1, 3.0))
            s2 = s1 * float(rng.uniform(1.01, 5.0))
            assert (breach_success_probability(_pair(mu1, mu2, s2))
                    <= breach_success_probability(_pair(mu1, mu2, s1)))

    def test_separation_monotonicity(self, rng):
        for _ in range(100):
            dim = int(rng.integers(1, 8))
            mu2 = rng.normal(0, 2, dim)
            delta = rng.normal(0, 1, dim)
            c = float(rng.uniform(1.0, 4.0))
            base = breach_success_probability(_pair(mu2 + delta, mu2, 1.0))
            scaled = breach_success_probability(_pair(mu2 + c * delta, mu2, 1.0))
            assert scaled >= base

    def test_invariants_rejected(self):
        with pytest.raises(DomainError):
            _pair([1, 2], [1, 2, 3], 1.0)
        with pytest.raises(DomainError):
            _pair([1], [0], 0.0)
        with pytest.raises(DomainError):
            _pair([], [], 1.0)


class TestSubsampling:
    def test_identity(self):
        out = subsample_trace(np.array([1.0, 2, 3, 4]), SamplingPolicy(1, 0))
        assert np.array_equal(out, [1, 2, 3, 4])

    def test_every_other(self):
        out = subsample_trace(np.array([1.0, 2, 3, 4]), SamplingPolicy(2, 0))
        assert np.array_equal(out, [1, 3])

    def test_phase_offset(self):
        out = subsample_trace(np.array([1.0, 2, 3, 4, 5]), SamplingPolicy(2, 1))
        assert np.array_equal(out, [2, 4])

    def test_length_formula(self, rng):
        for _ in range(100):
            t = int(rng.integers(1, 40))
            n = int(rng.integers(1, 10))
            phase = int(rng.integers(0, n))
            if phase >= t:
                continue
            out = subsample_trace(rng.normal(size=t), SamplingPolicy(n, phase))
            assert out.size == math.ceil((t - phase) / n)

    def test_empty_output_rejected(self):
        with pytest.raises(DomainError):
            subsample_trace(np.array([1.0, 2.0]), SamplingPolicy(5, 3))

    def test_policy_invariants(self):
        with pytest.raises(DomainError):
            SamplingPolicy(0, 0)
        with pytest.raises(DomainError):
            SamplingPolicy(3, 3)


class TestBreachCurve:
    def test_monotone_example(self):
        pts = breach_curve(_pair([1, 1, 1, 1], [0, 0, 0, 0], 1.0), [1, 2])
        assert abs(pts[0].success_prob - 0.8413) <= 5e-5
        assert abs(pts[1].success_prob - 0.7602) <= 5e-5
        for p in pts:
            assert p.success_prob + p.failure_prob == 1.0

    def test_single_interval_equals_direct(self):
        pair = _pair([2, 1, 0.5, 0.2, 0.1], [0, 0, 0, 0, 0], 1.5)
        pts = breach_curve(pair, [1])
        assert pts[0].success_prob == breach_success_probability(pair)

    def test_identical_means_flat_half(self):
        pts = breach_curve(_pair([3.0] * 6, [3.0] * 6, 1.0), [1, 2, 3])
        assert all(p.success_prob == 0.5 for p in pts)

    def test_nested_interval_monotonicity(self, rng):
        # phase-0 thinning at a multiple keeps a subset of samples, so the
        # adversary can only lose ground
        for _ in range(50):
            t = int(rng.integers(9, 40))
            pair = _pair(rng.normal(0, 2, t), rng.normal(0, 2, t),
                         float(rng.uniform(0.5, 3)))
            pts = breach_curve(pair, [1, 2, 4, 8])
            succ = [p.success_prob for p in pts]
            assert all(b <= a + 1e-15 for a, b in zip(succ, succ[1:]))

    def test_interval_bounds_enforced(self):
        pair = _pair([1, 0, 1, 0], [0, 0, 0, 0], 1.0)
        with pytest.raises(DomainError):
            breach_curve(pair, [4])
        with pytest.raises(DomainError):
            breach_curve(pair, [])

    def test_point_type(self):
        pts = breach_curve(_pair([1, 0, 1, 0], [0, 0, 0, 0], 1.0), [2, 1, 3])
        assert [p.interval for p in pts] == [2, 1, 3]
        assert all(isinstance(p, BreachCurvePoint) for p in pts)


class TestMonteCarlo:
    def test_coin_flip_at_equal_means(self):
        mc = monte_carlo_success(_pair([2.0, 2.0], [2.0, 2.0], 1.0), 10 ** 6, 5)
        assert abs(mc - 0.5) <= 0.002

    def test_near_separated(self):
        mc = monte_carlo_success(_pair([1.0, 1.0], [0.0, 0.0], 0.01), 10 ** 5, 5)
        assert mc >= 0.9999

    def test_deterministic_given_seed(self):
        pair = _pair([1.0, 0.2], [0.0, 0.0], 1.0)
        assert (monte_carlo_success(pair, 10 ** 5, 9)
                == monte_carlo_success(pair, 10 ** 5, 9))

    def test_trials_validated(self):
        with pytest.raises(DomainError):
            monte_carlo_success(_pair([1.0], [0.0], 1.0), 0, 1)


def test_most_vulnerable_success():
    weak = _pair([0.1, 0.1], [0.0, 0.0], 1.0)
    strong = _pair([3.0, 3.0], [0.0, 0.0], 1.0)
    assert (most_vulnerable_success([weak, strong])
            == breach_success_probability(strong))
    with pytest.raises(DomainError):
        most_vulnerable_success([])
