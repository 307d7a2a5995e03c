"""Two-type privacy-contract screening for the utility company.

The vendor prices two privacy settings without observing which of two types
(low valuation theta_low, high valuation theta_high, drawn with probability
1-p / p) it faces.  Preferences are quadratic in the setting,

    U(q, theta) = 0.5 * (q_bar^2 - (q - q_bar)^2) * theta,   0 <= q <= q_bar,

the vendor's unit cost of granting privacy q is zeta*q (calibrated from the
load-control degradation slope), and feasible menus must be incentive
compatible and individually rational for both types.

At the optimum the low type's participation constraint and the high type's
self-selection constraint bind, which pins both prices for any allocation
pair; profit maximization then separates into one problem per type.  The
high type's allocation is never distorted; the low type's is distorted
downward and collapses to zero (the shutdown regime) once the high-type
probability passes a critical threshold.  A brute-force grid oracle over
allocation pairs referees every closed form here.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError

DEFAULT_GRID_POINTS = 2001
BINDING_TOL = 1e-9


@dataclass(frozen=True)
class ScreeningScenario:
    """Type pair, high-type probability, setting cap, and cost slope."""

    theta_low: float
    theta_high: float
    p_high: float
    q_bar: float
    zeta: float

    def __post_init__(self):
        if not 0 < self.theta_low < self.theta_high:
            raise DomainError(
                f"types must satisfy 0 < theta_low < theta_high, got "
                f"({self.theta_low}, {self.theta_high})")
        if not 0 < self.p_high < 1:
            raise DomainError(f"p_high must lie in (0, 1), got {self.p_high}")
        if self.q_bar <= 0:
            raise DomainError(f"q_bar must be positive, got {self.q_bar}")
        if self.zeta <= 0:
            raise DomainError(f"zeta must be positive, got {self.zeta}")

    def with_p(self, p):
        return ScreeningScenario(self.theta_low, self.theta_high, p,
                                 self.q_bar, self.zeta)


@dataclass(frozen=True)
class ContractMenu:
    """Offered (price, privacy-setting) pair per type."""

    q_low: float
    t_low: float
    q_high: float
    t_high: float

    def __post_init__(self):
        if not 0 <= self.q_low <= self.q_high:
            raise DomainError(
                f"menu requires 0 <= q_low <= q_high, got "
                f"({self.q_low}, {self.q_high})")


@dataclass(frozen=True)
class ConstraintReport:
    """Slack of each original constraint (nonnegative = satisfied)."""

    ic_high_slack: float
    ic_low_slack: float
    ir_high_slack: float
    ir_low_slack: float
    ic_high_binding: bool
    ic_low_binding: bool
    ir_high_binding: bool
    ir_low_binding: bool
    tol: float


@dataclass(frozen=True)
class WelfarePoint:
    """Welfare decomposition at one population mix.

    ``welfare_eq21`` is the published piecewise closed form evaluated exactly
    as printed; where it disagrees with the direct computation the point is
    flagged downstream rather than reconciled.
    """

    p: float
    profit: float
    consumer_surplus: float
    welfare: float
    welfare_eq21: float
    shutdown: bool


@dataclass(frozen=True)
class ShutdownResult:
    """Smallest high-type probability at which the low type is excluded.

    ``degenerate`` marks scenarios where no interior low-type allocation
    exists at any p (zeta >= q_bar * theta_low); the value is then 0.
    """

    value: float
    degenerate: bool


def consumer_utility(q, theta, q_bar):
    """Quadratic privacy preference: 0 at q=0, peak 0.5*q_bar^2*theta at q_bar."""
    q = np.asarray(q, dtype=np.float64)
    if np.any(q < 0) or np.any(q > q_bar):
        raise DomainError(f"q must lie in [0, {q_bar}]")
    val = 0.5 * (q_bar * q_bar - (q - q_bar) ** 2) * theta
    return float(val) if val.ndim == 0 else val


def _prices(q_low, q_high, s):
    """Prices pinned by binding IR-low and IC-high."""
    t_low = consumer_utility(q_low, s.theta_low, s.q_bar)
    t_high = t_low + (consumer_utility(q_high, s.theta_high, s.q_bar)
                      - consumer_utility(q_low, s.theta_high, s.q_bar))
    return t_low, t_high


def _low_type_objective(q, s):
    """Separated low-type profit contribution (the q_low subproblem)."""
    coeff = s.theta_low - s.p_high * s.theta_high
    return (0.5 * (s.q_bar ** 2 - (q - s.q_bar) ** 2) * coeff
            - (1.0 - s.p_high) * s.zeta * q)


def closed_form_menu(s):
    """Analytic optimum of the screening problem.

    q_high = q_bar - zeta/theta_high (no distortion at the top).  While the
    low-type subproblem is concave (p < theta_low/theta_high) the interior
    stationary point applies, clamped at zero; past that the subproblem turns
    convex and the boundary comparison (which always favors exclusion) takes
    over.  Prices follow from the binding constraints.
    """
    if s.zeta / s.theta_high > s.q_bar:
        raise InfeasibleError(
            f"zeta/theta_high = {s.zeta / s.theta_high} exceeds q_bar = "
            f"{s.q_bar}: even the high type is priced out")
    q_high = min(max(s.q_bar - s.zeta / s.theta_high, 0.0), s.q_bar)
    coeff = s.theta_low - s.p_high * s.theta_high
    if coeff > 0:
        q_low = max(0.0, s.q_bar - (1.0 - s.p_high) * s.zeta / coeff)
    else:
        q_low = 0.0 if _low_type_objective(0.0, s) >= _low_type_objective(s.q_bar, s) \
            else s.q_bar
    q_low = min(q_low, q_high)
    t_low, t_high = _prices(q_low, q_high, s)
    return ContractMenu(q_low=q_low, t_low=t_low, q_high=q_high, t_high=t_high)


def full_information_menu(s):
    """First-best menu when types are observable: full surplus extraction."""
    if s.zeta / s.theta_low > s.q_bar:
        raise InfeasibleError(
            f"zeta/theta_low = {s.zeta / s.theta_low} exceeds q_bar = {s.q_bar}")
    q_high = s.q_bar - s.zeta / s.theta_high
    q_low = s.q_bar - s.zeta / s.theta_low
    return ContractMenu(
        q_low=q_low,
        t_low=consumer_utility(q_low, s.theta_low, s.q_bar),
        q_high=q_high,
        t_high=consumer_utility(q_high, s.theta_high, s.q_bar),
    )


def expected_profit(menu, s):
    """Vendor's expected profit at truthful self-selection."""
    return ((1.0 - s.p_high) * (menu.t_low - s.zeta * menu.q_low)
            + s.p_high * (menu.t_high - s.zeta * menu.q_high))


def oracle_menu(s, grid_points=DEFAULT_GRID_POINTS, utility=None, cost=None):
    """Brute-force referee: exhaustive allocation grid with pinned prices.

    Scans (q_low, q_high) on a uniform grid with q_low <= q_high, sets prices
    by the binding constraints, verifies all four original constraints
    numerically, and returns the best feasible point (first-lowest-index on
    ties).  ``utility(q, theta)`` and ``cost(q)`` may replace the quadratic
    family and the linear cost; both must be vectorized over q and carry the
    usual monotonicity (utility increasing in q and theta, marginal utility
    gap increasing in q, cost increasing).
    """
    if grid_points < 101:
        raise DomainError("grid_points must be >= 101")
    if utility is None:
        def utility(q, theta):
            return consumer_utility(q, theta, s.q_bar)
    if cost is None:
        def cost(q):
            return s.zeta * np.asarray(q, dtype=np.float64)

    qs = np.linspace(0.0, s.q_bar, grid_points)
    u_low = np.asarray(utility(qs, s.theta_low), dtype=np.float64)
    u_high = np.asarray(utility(qs, s.theta_high), dtype=np.float64)
    costs = np.asarray(cost(qs), dtype=np.float64)
    p = s.p_high

    best = (-math.inf, -1, -1)
    for i in range(grid_points):
        t_low = u_low[i]
        t_high = t_low + (u_high[i:] - u_high[i])
        profit = (1.0 - p) * (t_low - costs[i]) + p * (t_high - costs[i:])
        ic_high = (u_high[i:] - t_high) - (u_high[i] - t_low)
        ic_low = (u_low[i] - t_low) - (u_low[i:] - t_high)
        ir_low = u_low[i] - t_low
        ir_high = u_high[i:] - t_high
        feasible = ((ic_high >= -BINDING_TOL) & (ic_low >= -BINDING_TOL)
                    & (ir_low >= -BINDING_TOL) & (ir_high >= -BINDING_TOL))
        if not feasible.any():
            continue
        profit = np.where(feasible, profit, -math.inf)
        j = int(np.argmax(profit))
        if profit[j] > best[0]:
            best = (float(profit[j]), i, i + j)
    if best[1] < 0:
        raise InfeasibleError("no feasible allocation pair on the grid")
    _, i, j = best
    t_low = float(u_low[i])
    t_high = t_low + float(u_high[j] - u_high[i])
    return ContractMenu(q_low=float(qs[i]), t_low=t_low,
                        q_high=float(qs[j]), t_high=t_high)


def verify_constraints(menu, s, tol=BINDING_TOL):
    """Slacks of the four original constraints, with binding flags at ``tol``.

    At a screening optimum IR-low and IC-high bind while IC-low and IR-high
    hold with nonnegative slack; that structure is exactly what the
    constraint-reduction argument predicts, so this report is its numerical
    verification.
    """
    u = consumer_utility
    ic_high = ((u(menu.q_high, s.theta_high, s.q_bar) - menu.t_high)
               - (u(menu.q_low, s.theta_high, s.q_bar) - menu.t_low))
    ic_low = ((u(menu.q_low, s.theta_low, s.q_bar) - menu.t_low)
              - (u(menu.q_high, s.theta_low, s.q_bar) - menu.t_high))
    ir_low = u(menu.q_low, s.theta_low, s.q_bar) - menu.t_low
    ir_high = u(menu.q_high, s.theta_high, s.q_bar) - menu.t_high
    return ConstraintReport(
        ic_high_slack=ic_high, ic_low_slack=ic_low,
        ir_high_slack=ir_high, ir_low_slack=ir_low,
        ic_high_binding=abs(ic_high) <= tol, ic_low_binding=abs(ic_low) <= tol,
        ir_high_binding=abs(ir_high) <= tol, ir_low_binding=abs(ir_low) <= tol,
        tol=tol)


def welfare_eq21_as_printed(s):
    """Published piecewise welfare closed form, evaluated exactly as printed.

    Kept verbatim (including its branch split at p0 = theta_low/theta_high)
    so the discrepancy against the direct profit-plus-surplus computation can
    be measured instead of hidden.  Returns +/-inf at the removable
    singularity p = p0.
    """
    p = s.p_high
    p0 = s.theta_low / s.theta_high
    lead = -p * s.zeta * (s.q_bar - s.zeta / s.theta_high)
    denom = p * s.theta_high - s.theta_low
    if denom == 0.0:
        return math.inf
    ratio = (1.0 - p) * s.zeta / denom
    if p <= p0:
        phi = (1.0 - p) * (
            0.5 * (s.q_bar ** 2 - ratio ** 2) * s.theta_low
            - s.zeta * (s.q_bar - ratio))
        return lead + phi
    return lead + p * (0.5 * (s.q_bar ** 2 - ratio ** 2)
                       * (s.theta_high - s.theta_low))


def welfare_curve(s, p_grid):
    """Profit, consumer surplus, and welfare along a sweep of the type mix.

    The scenario's own p is ignored; each grid point re-solves the menu.  The
    low type never retains surplus (its participation constraint binds), so
    consumer surplus is the high type's information rent.
    """
    p_grid = [float(p) for p in p_grid]
    if any(not 0 < p < 1 for p in p_grid):
        raise DomainError("p grid values must lie in (0, 1)")
    if any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise DomainError("p grid must be sorted ascending")
    points = []
    for p in p_grid:
        sp = s.with_p(p)
        menu = closed_form_menu(sp)
        profit = expected_profit(menu, sp)
        rent = consumer_utility(menu.q_high, sp.theta_high, sp.q_bar) - menu.t_high
        surplus = p * rent
        points.append(WelfarePoint(
            p=p, profit=profit, consumer_surplus=surplus,
            welfare=profit + surplus,
            welfare_eq21=welfare_eq21_as_printed(sp),
            shutdown=menu.q_low == 0.0))
    return points


def shutdown_probability(s):
    """Smallest p at which the closed-form low allocation hits zero.

    Found by bisection on the clamp expression to 1e-12; for this quadratic
    family it equals (q_bar*theta_low - zeta) / (q_bar*theta_high - zeta).
    Scenarios with zeta >= q_bar*theta_low have no interior region at any p
    and come back degenerate with value 0.
    """
    if s.zeta >= s.q_bar * s.theta_low:
        return ShutdownResult(value=0.0, degenerate=True)

    def q_low_at(p):
        return closed_form_menu(s.with_p(p)).q_low

    lo, hi = 1e-15, 1.0 - 1e-15
    if q_low_at(hi) > 0.0:
        return ShutdownResult(value=1.0, degenerate=False)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if q_low_at(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return ShutdownResult(value=0.5 * (lo + hi), degenerate=False)
