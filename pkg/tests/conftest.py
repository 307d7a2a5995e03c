"""Shared oracles and scenario generators for the test suite."""

import math

import numpy as np
import pytest

from gridveil.insurance import InsuranceScenario, UtilityFamily
from gridveil.screening import ScreeningScenario


def adaptive_simpson(f, a, b, tol=1e-13, depth=48):
    """Independent quadrature oracle (recursive Simpson with error control)."""

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, level):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flm, frm = f(lmid), f(rmid)
        left = simpson(lo, mid, flo, flm, fmid)
        right = simpson(mid, hi, fmid, frm, fhi)
        if level <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, mid, flo, flm, fmid, left, eps / 2.0, level - 1)
                + recurse(mid, hi, fmid, frm, fhi, right, eps / 2.0, level - 1))

    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, depth)


def erf_quadrature(x, tol=1e-13):
    """erf by direct quadrature of the Gaussian kernel."""
    if x == 0.0:
        return 0.0
    sign = 1.0 if x > 0 else -1.0
    val = adaptive_simpson(lambda t: math.exp(-t * t), 0.0, abs(x), tol=tol)
    return sign * 2.0 / math.sqrt(math.pi) * val


def normal_tail_quadrature(z):
    """P(Z > z) for standard normal Z, by quadrature on a finite window."""
    upper = max(z + 14.0, 14.0)
    val = adaptive_simpson(
        lambda t: math.exp(-0.5 * t * t), z, upper, tol=1e-14)
    return val / math.sqrt(2.0 * math.pi)


def random_screening_scenario(rng, below_shutdown=None):
    """Scenario with an interior high allocation; optionally pin the p regime."""
    while True:
        theta_low = rng.uniform(0.2, 1.0)
        theta_high = theta_low * rng.uniform(1.3, 3.0)
        q_bar = rng.uniform(4.0, 15.0)
        zeta = rng.uniform(0.1, 0.8) * q_bar * theta_low
        p_shut = (q_bar * theta_low - zeta) / (q_bar * theta_high - zeta)
        if below_shutdown is None:
            p = rng.uniform(0.05, 0.95)
        elif below_shutdown:
            p = rng.uniform(0.1, 0.9) * p_shut
            if p <= 0.01:
                continue
        else:
            p = p_shut + rng.uniform(0.05, 0.9) * (1.0 - p_shut)
            if p >= 0.99:
                continue
        return ScreeningScenario(theta_low=theta_low, theta_high=theta_high,
                                 p_high=p, q_bar=q_bar, zeta=zeta)


def random_utility(rng):
    """A family with moderate curvature: keeps W''' small enough for the
    finite-difference stationarity checks to be meaningful at h = 1e-6."""
    kind = ("logarithmic", "exponential", "power")[int(rng.integers(3))]
    if kind == "exponential":
        return UtilityFamily(kind, float(rng.uniform(0.05, 0.25)))
    if kind == "power":
        gamma = float(rng.uniform(0.3, 2.0))
        if abs(gamma - 1.0) < 0.05:
            gamma = 1.5
        return UtilityFamily(kind, gamma)
    return UtilityFamily(kind)


def random_insurance_scenario(rng):
    """Two-type scenario in the regime where both contracts trade.

    Draws are rejected until the menu profit has positive slope at the
    no-insurance corner, i.e. serving the low type strictly pays; the
    interior stationarity system only describes that regime (the full
    insurance corner is never optimal: the slope there is strictly
    negative).
    """
    from gridveil.insurance import _profit_slope

    while True:
        wealth = float(rng.uniform(8.0, 14.0))
        loss = float(rng.uniform(0.3, 0.6)) * wealth
        eta_h = float(rng.uniform(0.5, 0.7))
        eta_l = eta_h + float(rng.uniform(0.12, 0.25))
        p = float(rng.uniform(0.05, 0.2))
        s = InsuranceScenario(wealth=wealth, loss=loss, eta_high_risk=eta_h,
                              eta_low_risk=min(eta_l, 0.95), p_risky=p,
                              utility=random_utility(rng))
        if _profit_slope(s.utility.value(wealth - loss), s) > 0.0:
            return s


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
