"""Direct-load-control degradation under subsampled measurements.

The plant is the scalar accumulator ``x+ = x + u + d`` (the known nominal
demand term is cancelled by feedforward, so the analysis runs on deviations).
The controller sees the state only every N steps but may act at every step
with per-offset gains on the last sample.  Lifting one period gives an exact
time-invariant system

    x+   = a_cl x + b_cl . d        a_cl = 1 - sum(K)
    z_i  = c_cl_i x + (d_cl d)_i    c_cl_i = 1 - sum(K_<i),  d_cl strict-lower ones

whose worst-case l2 gain from disturbance to deviation is the H-infinity
norm: the supremum over the unit circle of the largest singular value of
``G(z) = c (z - a)^(-1) b^T + D``.

Because the state is scalar, ``G^H G`` is a rank-2 update of the constant
Gram matrix ``D^T D``, so each frequency point reduces to a secular
root-find rather than a full SVD; the sweep evaluates a uniform grid and
golden-refines around the argmax.  A ``sqrt(eig_max(D^T D))`` floor is
always valid for the supremum (the circle average of G equals D) and is
applied as a final guard.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from ._parallel import ordered_map
from .errors import CalibrationError, DomainError, NumericalError
from .numerics import NormalStream, derive_seed, nelder_mead_min

#: stability margin on |a_cl| enforced during controller search
STABILITY_MARGIN = 1e-6
#: grid used while the optimizer explores gain space (final norms use defaults)
SEARCH_FREQ_POINTS = 128
DEFAULT_FREQ_POINTS = 4096
DEFAULT_REFINE_TOL = 1e-8


@dataclass(frozen=True)
class SubsampledPlant:
    """Scalar unit-gain plant measured every ``interval`` steps."""

    interval: int

    def __post_init__(self):
        if self.interval < 1:
            raise DomainError(f"interval must be >= 1, got {self.interval}")


@dataclass(frozen=True)
class PeriodicController:
    """Within-period gains: u at offset i is -gains[i] times the last sample."""

    gains: np.ndarray

    def __init__(self, gains):
        gains = np.asarray(gains, dtype=np.float64)
        if gains.ndim != 1 or gains.size == 0:
            raise DomainError("gains must be a non-empty 1-D vector")
        if not np.all(np.isfinite(gains)):
            raise DomainError("gains must be finite")
        object.__setattr__(self, "gains", gains)


@dataclass(frozen=True)
class SubsampledLoop:
    """Exact period-N lifting of the closed loop (state dim 1)."""

    a_cl: float
    b_cl: np.ndarray
    c_cl: np.ndarray
    d_cl: np.ndarray

    @property
    def interval(self):
        return self.b_cl.size


@dataclass(frozen=True)
class PerformancePoint:
    interval: int
    hinf_norm: float
    gains: np.ndarray


def lift_closed_loop(plant, ctrl):
    """Lift one measurement period into a time-invariant system."""
    n = plant.interval
    if ctrl.gains.size != n:
        raise DomainError(
            f"controller length {ctrl.gains.size} != plant interval {n}")
    partial = np.concatenate([[0.0], np.cumsum(ctrl.gains)])
    a_cl = 1.0 - partial[n]
    b_cl = np.ones(n)
    c_cl = 1.0 - partial[:n]
    d_cl = np.tril(np.ones((n, n)), -1)
    return SubsampledLoop(a_cl=float(a_cl), b_cl=b_cl, c_cl=c_cl, d_cl=d_cl)


def simulate_time_domain(plant, ctrl, x0, disturbances):
    """Step-by-step closed-loop run; returns the pre-correction state sequence.

    Independent of the lifting: used to certify that the lifted system is an
    exact reformulation.
    """
    n = plant.interval
    d = np.asarray(disturbances, dtype=np.float64)
    x = float(x0)
    sample = x
    out = np.empty(d.size)
    for k in range(d.size):
        offset = k % n
        if offset == 0:
            sample = x
        out[k] = x
        u = -ctrl.gains[offset] * sample
        x = x + u + d[k]
    return out


def simulate_lifted(loop, x0, disturbances):
    """Drive the lifted system block by block; output matches the time domain."""
    n = loop.interval
    d = np.asarray(disturbances, dtype=np.float64)
    if d.size % n != 0:
        raise DomainError(f"disturbance length must be a multiple of N={n}")
    x = float(x0)
    blocks = []
    for k in range(d.size // n):
        dk = d[k * n:(k + 1) * n]
        blocks.append(loop.c_cl * x + loop.d_cl @ dk)
        x = loop.a_cl * x + float(loop.b_cl @ dk)
    return np.concatenate(blocks)


@lru_cache(maxsize=64)
def _gram_basis(n):
    """Eigen-decomposition of D^T D plus the all-ones input projection.

    D is the strict-lower-ones matrix shared by every controller of period n,
    so this is cached per interval.
    """
    d = np.tril(np.ones((n, n)), -1)
    lam, q = np.linalg.eigh(d.T @ d)
    bproj = q.T @ np.ones(n)
    return d, lam, q, bproj


def _sweep_inputs(loop, omegas):
    n = loop.interval
    d, lam, q, bproj = _gram_basis(n)
    wproj = q.T @ (d.T @ loop.c_cl)
    s_c = float(loop.c_cl @ loop.c_cl)
    s_b = float(n)
    er = np.cos(omegas) - loop.a_cl
    ei = np.sin(omegas)
    den = er * er + ei * ei
    return lam, bproj, wproj, s_c, s_b, er / den, 1.0 / den


def _gain_at(loop, omega):
    lam, bproj, wproj, s_c, s_b, re_k, k2 = _sweep_inputs(
        loop, np.atleast_1d(np.asarray(omega, dtype=np.float64)))
    vals = _kernels.secular_sweep(lam, bproj, wproj, s_c, s_b, re_k, k2)
    return math.sqrt(max(float(vals[0]), 0.0))


def hinf_norm(loop, freq_points=DEFAULT_FREQ_POINTS, refine_tol=DEFAULT_REFINE_TOL):
    """Worst-case l2 gain from disturbance to deviation.

    Supremum over the unit circle of the top singular value of the lifted
    transfer matrix, evaluated on a uniform ``freq_points`` grid (the
    symmetric upper half suffices: G at conjugate frequencies has equal
    singular values) and golden-refined to ``refine_tol`` around the grid
    argmax.
    """
    if freq_points < 64:
        raise DomainError("freq_points must be >= 64")
    if abs(loop.a_cl) >= 1.0:
        raise NumericalError(
            f"lifted transition a_cl={loop.a_cl} is not stable (|a_cl| >= 1)",
            context=loop.a_cl)
    if not np.any(loop.b_cl) and not np.any(loop.d_cl):
        return 0.0
    half = freq_points // 2
    omegas = np.arange(half + 1) * (2.0 * math.pi / freq_points)
    lam, bproj, wproj, s_c, s_b, re_k, k2 = _sweep_inputs(loop, omegas)
    vals = _kernels.secular_sweep(lam, bproj, wproj, s_c, s_b, re_k, k2)
    best = int(np.argmax(vals))
    peak = math.sqrt(max(float(vals[best]), 0.0))

    spacing = 2.0 * math.pi / freq_points
    lo = max(0.0, omegas[best] - spacing)
    hi = min(math.pi, omegas[best] + spacing)
    # plain golden-section maximize on [lo, hi]; the interval is tiny so the
    # general optimizer's machinery is unnecessary here
    inv_golden = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_golden * (hi - lo)
    dd = lo + inv_golden * (hi - lo)
    fc, fd = _gain_at(loop, c), _gain_at(loop, dd)
    while hi - lo > refine_tol:
        if fc < fd:
            lo, c, fc = c, dd, fd
            dd = lo + inv_golden * (hi - lo)
            fd = _gain_at(loop, dd)
        else:
            hi, dd, fd = dd, c, fc
            c = hi - inv_golden * (hi - lo)
            fc = _gain_at(loop, c)
        peak = max(peak, fc, fd)

    floor = math.sqrt(max(float(lam[-1]), 0.0))
    return max(peak, floor)


def _search_objective(plant, freq_points):
    limit = 1.0 - STABILITY_MARGIN

    def objective(gains):
        a_cl = 1.0 - float(np.sum(gains))
        if abs(a_cl) >= limit:
            return 1e8 * (1.0 + abs(a_cl))
        loop = lift_closed_loop(plant, PeriodicController(gains))
        half = freq_points // 2
        omegas = np.arange(half + 1) * (2.0 * math.pi / freq_points)
        lam, bproj, wproj, s_c, s_b, re_k, k2 = _sweep_inputs(loop, omegas)
        vals = _kernels.secular_sweep(lam, bproj, wproj, s_c, s_b, re_k, k2)
        return math.sqrt(max(float(vals.max()), float(lam[-1]), 0.0))

    return objective


def optimal_subsampled_controller(plant, restarts=8, seed=0):
    """Best within-class controller found by seeded multi-start Nelder-Mead.

    Start 0 is the deadbeat pattern (1, 0, ..., 0); the rest are seeded
    perturbations of it.  Instability is handled by penalty, the reported
    norm is re-evaluated at full sweep resolution, and the whole procedure is
    deterministic given ``seed``.  The result is an upper bound on what the
    declared controller class can achieve.
    """
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    n = plant.interval
    deadbeat = np.zeros(n)
    deadbeat[0] = 1.0
    objective = _search_objective(plant, SEARCH_FREQ_POINTS)

    best_gains = None
    best_norm = math.inf
    for r in range(restarts):
        if r == 0:
            start = deadbeat
        else:
            stream = NormalStream(derive_seed(seed, r))
            start = deadbeat + 0.5 * stream.draw(n)
        report = nelder_mead_min(objective, start, tol=1e-9, max_iter=400 + 120 * n)
        gains = report.argopt
        if abs(1.0 - float(np.sum(gains))) >= 1.0 - STABILITY_MARGIN:
            continue
        norm = hinf_norm(lift_closed_loop(plant, PeriodicController(gains)))
        if norm < best_norm - 1e-15:
            best_norm, best_gains = norm, gains
    if best_gains is None:
        raise NumericalError(
            f"no stabilizing controller found for N={n} after {restarts} restarts")
    return PerformancePoint(interval=n, hinf_norm=best_norm, gains=best_gains)


def performance_curve(intervals, restarts=8, seed=0):
    """Optimal-controller norms per interval, assembled in input order."""
    intervals = [int(n) for n in intervals]
    if any(b <= a for a, b in zip(intervals, intervals[1:])):
        raise DomainError("intervals must be sorted ascending")
    return ordered_map(
        lambda n: optimal_subsampled_controller(
            SubsampledPlant(n), restarts=restarts, seed=seed),
        intervals)


def fit_linear_degradation(curve, q_map):
    """Least-squares slope of the optimal norm against the privacy setting.

    ``q_map`` pairs each privacy setting q with a measurement interval that
    must be present in ``curve``; q must increase strictly with the interval
    (more privacy = sparser metering).  Returns the fitted slope, which must
    be positive for the linear degradation model to make sense.
    """
    by_interval = {p.interval: p.hinf_norm for p in curve}
    pairs = sorted(((float(q), int(n)) for q, n in q_map), key=lambda t: t[1])
    if len(pairs) < 2:
        raise DomainError("q_map needs at least two entries")
    qs = [q for q, _ in pairs]
    if len(set(qs)) < 2:
        raise DomainError("q_map needs at least two distinct q values")
    if any(q2 <= q1 for q1, q2 in zip(qs, qs[1:])):
        raise DomainError("q must increase strictly with the interval")
    missing = [n for _, n in pairs if n not in by_interval]
    if missing:
        raise DomainError(f"q_map intervals {missing} not present in the curve")
    x = np.array(qs)
    y = np.array([by_interval[n] for _, n in pairs])
    xc = x - x.mean()
    denom = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / denom
    if slope <= 0:
        raise CalibrationError(
            f"fit_linear_degradation: fitted slope {slope} is not positive; "
            "linear degradation model violated")
    return slope
