"""Shared numerical kernels: error function, derivative-free optimizers,
largest singular value, and the seeded randomness contract.

All operations are pure functions of their inputs and safe to call from
multiple threads.  Random streams are value objects; parallel consumers use
``derive_seed(seed, worker)`` to obtain decorrelated streams.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalError

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

#: |x| at and beyond which erf saturates to +-1 exactly (erfc(6) ~ 2.2e-17,
#: below half an ulp of 1).
ERF_SATURATION = 6.0


@dataclass(frozen=True)
class Interval:
    """Closed search interval with finite endpoints, lo < hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("interval endpoints must be finite")
        if not self.lo < self.hi:
            raise DomainError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass
class OptimizerReport:
    """Outcome of a derivative-free search.

    ``residual`` is the final interval width (golden section) or simplex
    diameter (Nelder-Mead); when ``converged`` it is <= the requested tol.
    """

    argopt: np.ndarray
    value: float
    iterations: int
    converged: bool
    residual: float

    @property
    def x(self):
        """Scalar argopt for one-dimensional searches."""
        return float(self.argopt[0])


def erf(x):
    """Gauss error function, absolute error below 1e-12 on |x| <= 6.

    Series/continued-fraction hybrid with switchover at |x| = 3: the scaled
    positive-term Maclaurin series below (no cancellation), a Lentz-evaluated
    complement continued fraction above.  Saturates to +-1.0 exactly for
    |x| >= 6.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"erf requires finite input, got {x}")
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax >= ERF_SATURATION:
        return math.copysign(1.0, x)
    if ax < 3.0:
        term = ax
        total = ax
        two_x2 = 2.0 * ax * ax
        n = 0
        while True:
            n += 1
            term *= two_x2 / (2 * n + 1)
            total += term
            if term < 1e-17 * total:
                break
        val = _TWO_OVER_SQRT_PI * math.exp(-ax * ax) * total
    else:
        # erfc(ax) = exp(-ax^2) / (sqrt(pi) * CF),
        # CF = x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...))))
        f = ax
        c = f
        d = 0.0
        for n in range(1, 200):
            a_n = 0.5 * n
            d = 1.0 / (ax + a_n * d)
            c = ax + a_n / c
            delta = c * d
            f *= delta
            if abs(delta - 1.0) < 1e-17:
                break
        erfc = math.exp(-ax * ax) / (math.sqrt(math.pi) * f)
        val = 1.0 - erfc
    return math.copysign(val, x)


def golden_section_max(objective, domain, tol):
    """Maximize a scalar function on an interval by golden-section search.

    For unimodal objectives the returned argopt is within ``tol`` of the true
    maximizer; in all cases the best point actually evaluated is returned.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    lo, hi = domain.lo, domain.hi
    best_x = None
    best_f = -math.inf
    evals = 0

    def f(x):
        nonlocal best_x, best_f, evals
        v = float(objective(x))
        evals += 1
        if not math.isfinite(v):
            raise NumericalError(
                f"objective returned non-finite value {v} at x={x}", context=x)
        if v >= best_f:
            # ties prefer the latest probe: it lies in the tightest bracket
            best_f, best_x = v, x
        return v

    c = hi - _INV_GOLDEN * (hi - lo)
    d = lo + _INV_GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            lo = c
            c, fc = d, fd
            d = lo + _INV_GOLDEN * (hi - lo)
            fd = f(d)
        else:
            hi = d
            d, fd = c, fc
            c = hi - _INV_GOLDEN * (hi - lo)
            fc = f(c)
    return OptimizerReport(
        argopt=np.array([best_x]), value=best_f, iterations=evals,
        converged=True, residual=hi - lo)


def nelder_mead_min(objective, start, tol, max_iter):
    """Minimize a vector function with the Nelder-Mead simplex method.

    Deterministic given ``start``.  Converges when the simplex diameter drops
    to ``tol``; exceeding ``max_iter`` returns a report with
    ``converged=False`` rather than raising.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    x0 = np.asarray(start, dtype=np.float64)
    if x0.ndim != 1 or x0.size < 1:
        raise DomainError("start must be a 1-D vector")
    n = x0.size

    def f(x):
        v = float(objective(x))
        if math.isnan(v):
            raise NumericalError(f"objective returned NaN at {x}", context=x)
        return v

    simplex = [x0.copy()]
    for i in range(n):
        p = x0.copy()
        p[i] = p[i] * 1.05 if p[i] != 0.0 else 0.00025
        simplex.append(p)
    simplex = np.array(simplex)
    values = np.array([f(p) for p in simplex])

    iterations = 0
    while iterations < max_iter:
        iterations += 1
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        diameter = float(np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)))
        if diameter <= tol:
            return OptimizerReport(
                argopt=simplex[0].copy(), value=float(values[0]),
                iterations=iterations, converged=True, residual=diameter)
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        fr = f(reflected)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
        elif fr < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            fe = f(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
        else:
            contracted = centroid + 0.5 * (worst - centroid)
            fc = f(contracted)
            if fc < values[-1]:
                simplex[-1], values[-1] = contracted, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                values[1:] = [f(p) for p in simplex[1:]]

    order = np.argsort(values, kind="stable")
    simplex, values = simplex[order], values[order]
    diameter = float(np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)))
    return OptimizerReport(
        argopt=simplex[0].copy(), value=float(values[0]),
        iterations=iterations, converged=False, residual=diameter)


def max_singular_value(m, tol=1e-12, max_iter=10000):
    """Largest singular value by power iteration on the Gram matrix.

    Deterministic: starts from the normalized all-ones vector and stops when
    the Rayleigh-quotient estimate is stable to ``tol`` relative.  Relative
    error is below 1e-10 for matrices with any spectral gap; degenerate top
    singular values converge immediately within the top subspace.
    """
    a = np.asarray(m)
    if a.ndim != 2 or a.size == 0:
        raise DomainError("matrix must be 2-D and non-empty")
    if not np.all(np.isfinite(a.real)) or (np.iscomplexobj(a) and not np.all(np.isfinite(a.imag))):
        raise NumericalError("matrix has non-finite entries")
    n = a.shape[1]
    v = np.full(n, 1.0 / math.sqrt(n), dtype=complex if np.iscomplexobj(a) else float)
    sigma = 0.0
    for _ in range(max_iter):
        av = a @ v
        norm_av = float(np.linalg.norm(av))
        if norm_av == 0.0:
            # start vector orthogonal to the row space: restart on the
            # heaviest column, or the matrix is zero
            col_norms = np.linalg.norm(a, axis=0)
            j = int(np.argmax(col_norms))
            if col_norms[j] == 0.0:
                return 0.0
            v = np.zeros_like(v)
            v[j] = 1.0
            av = a @ v
            norm_av = float(np.linalg.norm(av))
        new_sigma = norm_av
        z = a.conj().T @ av
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            return new_sigma
        v = z / nz
        if abs(new_sigma - sigma) <= tol * max(1.0, new_sigma):
            return new_sigma
        sigma = new_sigma
    return sigma


def derive_seed(seed, worker_index):
    """Decorrelated child seed: ``seed XOR (golden-ratio constant * worker)``.

    Documented derivation for parallel Monte Carlo; worker 0 returns the
    parent seed unchanged.
    """
    return (seed ^ ((_kernels.GOLDEN * worker_index) & _kernels.MASK64)) & _kernels.MASK64


@dataclass
class NormalStream:
    """Reproducible stream of standard normal deviates.

    Counter-based: the k-th deviate of a given seed is a pure function of
    (seed, k), identical across runs, platforms, and kernel backends.  A
    stream instance is a value object owned by one consumer; share work by
    deriving child seeds instead of sharing instances.
    """

    seed: int
    position: int = field(default=0)

    def draw(self, count):
        out = _kernels.normal_block(self.seed & _kernels.MASK64, self.position, count)
        self.position += count
        return out

    def uniforms(self, count):
        out = _kernels.uniform_block(self.seed & _kernels.MASK64, self.position, count)
        self.position += count
        return out

    def split(self, worker_index):
        return NormalStream(derive_seed(self.seed, worker_index))


def seeded_normal_stream(seed):
    """Stream of standard normals; identical seed yields identical draws."""
    return NormalStream(seed)
