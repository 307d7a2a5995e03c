"""Privacy-breach insurance: the consumer's coverage choice and the
monopolist insurer's two-type menu.

A consumer with wealth y faces a loss l with probability 1-eta (a successful
breach).  Buying beta units of coverage at unit price c trades premium
``beta*c`` in the safe state for a net payout ``(1-c)*beta`` in the attack
state; the optimal beta maximizes expected utility and obeys the first-order
condition exposed by ``kkt_residual``.  At the actuarially fair price
c = 1-eta the consumer insures fully (beta = l); at any dearer price the
coverage is strictly partial.

The insurer prices a menu for two risk types (eta_high_risk < eta_low_risk:
the risky type is breached more often) without observing types.  Working in
transformed variables ``Ua = U(y - l + alpha_a)``, ``Un = U(y - alpha_n)``
both binding constraints become linear: the low-risk participation
constraint pins that type to a one-parameter line, and convexity of the
inverse utility W forces the high-risk contract to full insurance (Jensen:
the cheapest way to deliver any promised utility level is deterministic
wealth).  That reduces the menu problem to a one-dimensional concave search,
refereed by a two-dimensional grid oracle that does not assume full
insurance and rediscovers it.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError
from .numerics import Interval, golden_section_max

DEFAULT_GRID_POINTS = 2001
_UTILITY_KINDS = ("logarithmic", "exponential", "power")


@dataclass(frozen=True)
class UtilityFamily:
    """Strictly increasing, strictly concave utility with U(0) = 0.

    Families: logarithmic ``ln(1+w)`` (parameter ignored), exponential
    ``1 - exp(-a w)`` (parameter a > 0), power
    ``((1+w)^(1-g) - 1)/(1-g)`` (parameter g > 0, g != 1).  Each has a
    closed-form inverse W with W' > 0 and W'' > 0, which is what the
    insurer's transformed problem requires.
    """

    kind: str
    parameter: float = 1.0

    def __post_init__(self):
        if self.kind not in _UTILITY_KINDS:
            raise DomainError(f"unknown utility kind {self.kind!r}; "
                              f"expected one of {_UTILITY_KINDS}")
        if self.kind == "exponential" and self.parameter <= 0:
            raise DomainError("exponential utility needs parameter > 0")
        if self.kind == "power" and (self.parameter <= 0 or self.parameter == 1.0):
            raise DomainError("power utility needs parameter > 0, != 1")

    @property
    def wealth_floor(self):
        """Open lower bound of the wealth domain (-inf for exponential)."""
        return -math.inf if self.kind == "exponential" else -1.0

    def _check_wealth(self, w):
        if not w > self.wealth_floor:
            raise DomainError(
                f"wealth {w} outside utility domain (> {self.wealth_floor})")

    def value(self, w):
        w = float(w)
        self._check_wealth(w)
        if self.kind == "logarithmic":
            return math.log1p(w)
        if self.kind == "exponential":
            return 1.0 - math.exp(-self.parameter * w)
        g = self.parameter
        return (math.pow(1.0 + w, 1.0 - g) - 1.0) / (1.0 - g)

    def derivative(self, w):
        w = float(w)
        self._check_wealth(w)
        if self.kind == "logarithmic":
            return 1.0 / (1.0 + w)
        if self.kind == "exponential":
            return self.parameter * math.exp(-self.parameter * w)
        return math.pow(1.0 + w, -self.parameter)

    def inverse(self, v):
        """W(v): wealth delivering utility v."""
        v = float(v)
        if self.kind == "logarithmic":
            return math.expm1(v)
        if self.kind == "exponential":
            if v >= 1.0:
                raise DomainError(f"utility value {v} >= 1 unreachable for "
                                  "exponential family")
            return -math.log1p(-v) / self.parameter
        g = self.parameter
        base = 1.0 + (1.0 - g) * v
        if base <= 0.0:
            raise DomainError(f"utility value {v} unreachable for power family")
        return math.pow(base, 1.0 / (1.0 - g)) - 1.0

    def inverse_derivative(self, v):
        """W'(v) = 1 / U'(W(v)); positive and increasing."""
        v = float(v)
        if self.kind == "logarithmic":
            return math.exp(v)
        if self.kind == "exponential":
            if v >= 1.0:
                raise DomainError(f"utility value {v} >= 1 unreachable for "
                                  "exponential family")
            return 1.0 / (self.parameter * (1.0 - v))
        g = self.parameter
        base = 1.0 + (1.0 - g) * v
        if base <= 0.0:
            raise DomainError(f"utility value {v} unreachable for power family")
        return math.pow(base, g / (1.0 - g))

    def inverse_array(self, v):
        """Vectorized W(v) for grid oracles."""
        v = np.asarray(v, dtype=np.float64)
        if self.kind == "logarithmic":
            return np.expm1(v)
        if self.kind == "exponential":
            if np.any(v >= 1.0):
                raise DomainError("utility values >= 1 unreachable for "
                                  "exponential family")
            return -np.log1p(-v) / self.parameter
        g = self.parameter
        base = 1.0 + (1.0 - g) * v
        if np.any(base <= 0.0):
            raise DomainError("utility values unreachable for power family")
        return np.power(base, 1.0 / (1.0 - g)) - 1.0


@dataclass(frozen=True)
class ConsumerInsuranceProblem:
    """One consumer's coverage decision: wealth, loss, fail probability, price."""

    wealth: float
    loss: float
    eta: float
    premium_rate: float
    utility: UtilityFamily

    def __post_init__(self):
        if not 0 < self.loss <= self.wealth:
            raise DomainError(
                f"loss must satisfy 0 < loss <= wealth, got loss={self.loss} "
                f"wealth={self.wealth}")
        if not 0 < self.eta < 1:
            raise DomainError(f"eta must lie in (0, 1), got {self.eta}")
        if not 0 < self.premium_rate < 1:
            raise DomainError(
                f"premium rate must lie in (0, 1), got {self.premium_rate}")


@dataclass(frozen=True)
class InsuranceScenario:
    """Population with risky (often-breached) and safe consumer types."""

    wealth: float
    loss: float
    eta_high_risk: float
    eta_low_risk: float
    p_risky: float
    utility: UtilityFamily

    def __post_init__(self):
        if not 0 < self.eta_high_risk < self.eta_low_risk < 1:
            raise DomainError(
                "fail probabilities must satisfy 0 < eta_high_risk < "
                f"eta_low_risk < 1, got ({self.eta_high_risk}, {self.eta_low_risk})")
        if not 0 < self.loss <= self.wealth:
            raise DomainError(
                f"loss must satisfy 0 < loss <= wealth, got loss={self.loss} "
                f"wealth={self.wealth}")
        if not 0 < self.p_risky < 1:
            raise DomainError(f"p_risky must lie in (0, 1), got {self.p_risky}")


@dataclass(frozen=True)
class InsuranceMenu:
    """Per type: payout on a successful attack, premium otherwise."""

    alpha_attack_high: float
    alpha_premium_high: float
    alpha_attack_low: float
    alpha_premium_low: float

    def __post_init__(self):
        for name in ("alpha_attack_high", "alpha_premium_high",
                     "alpha_attack_low", "alpha_premium_low"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class MenuDiagnostics:
    """Constraint residuals and recovered multipliers at a menu."""

    ic_h_residual: float
    ir_l_residual: float
    full_insurance_gap_h: float
    partial_insurance_margin_l: float
    lagrange_lambda1: float
    lagrange_lambda2: float
    ic_l_slack: float
    ir_h_slack: float


def objective_value(beta, prob):
    """Expected utility of buying ``beta`` units of coverage."""
    u = prob.utility
    return (prob.eta * u.value(prob.wealth - beta * prob.premium_rate)
            + (1.0 - prob.eta) * u.value(
                prob.wealth + (1.0 - prob.premium_rate) * beta - prob.loss))


def kkt_residual(beta, prob):
    """Stationarity expression of the coverage problem.

    Zero at an interior optimum; must be <= 0 at the beta = 0 corner.  Raises
    a domain error naming the offending wealth when an evaluation leaves the
    utility domain.
    """
    if beta < 0:
        raise DomainError(f"beta must be nonnegative, got {beta}")
    u = prob.utility
    c = prob.premium_rate
    w_safe = prob.wealth - beta * c
    w_attack = prob.wealth + (1.0 - c) * beta - prob.loss
    return (-prob.eta * c * u.derivative(w_safe)
            + (1.0 - prob.eta) * (1.0 - c) * u.derivative(w_attack))


def consumer_optimal_coverage(prob):
    """Utility-maximizing coverage on [0, loss/premium_rate].

    The objective is concave, so golden-section locates the optimum; the
    result is then polished against the first-order condition so interior
    optima carry a stationarity residual at machine level, and corner
    solutions return exactly 0 (with a nonpositive directional derivative)
    or exactly the cap.
    """
    beta_max = prob.loss / prob.premium_rate
    if kkt_residual(0.0, prob) <= 0.0:
        return 0.0
    if kkt_residual(beta_max, prob) >= 0.0:
        return beta_max
    tol = 1e-11 * (1.0 + beta_max)
    report = golden_section_max(
        lambda b: objective_value(b, prob), Interval(0.0, beta_max), tol)
    lo = max(0.0, report.x - 2.0 * tol)
    hi = min(beta_max, report.x + 2.0 * tol)
    # the residual is strictly decreasing (concavity); tighten by bisection
    rl = kkt_residual(lo, prob)
    rh = kkt_residual(hi, prob)
    if rl < 0.0:
        lo, hi = 0.0, hi
    if rh > 0.0:
        lo, hi = lo, beta_max
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if kkt_residual(mid, prob) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _reservation(s):
    """Low-risk type's expected utility with no insurance at all."""
    u = s.utility
    return ((1.0 - s.eta_low_risk) * u.value(s.wealth - s.loss)
            + s.eta_low_risk * u.value(s.wealth))


def _menu_from_ua_low(ua_low, s):
    """Menu implied by the low type's attack-state utility level.

    The low contract sits on the binding participation line; the high
    contract delivers the low contract's high-risk-weighted utility as
    deterministic wealth (full insurance), which is the Jensen-optimal way
    to satisfy the binding self-selection constraint.
    """
    u = s.utility
    r = _reservation(s)
    un_low = (r - (1.0 - s.eta_low_risk) * ua_low) / s.eta_low_risk
    m = (1.0 - s.eta_high_risk) * ua_low + s.eta_high_risk * un_low
    w_attack_low = u.inverse(ua_low)
    w_safe_low = u.inverse(un_low)
    w_high = u.inverse(m)
    eps = 1e-12 * (1.0 + s.wealth)

    def _clip(x):
        # inverse round-trips leave +-ulp dust at the zero-coverage boundary
        if -eps < x < 0.0:
            return 0.0
        return x

    return InsuranceMenu(
        alpha_attack_high=_clip(w_high - (s.wealth - s.loss)),
        alpha_premium_high=_clip(s.wealth - w_high),
        alpha_attack_low=_clip(w_attack_low - (s.wealth - s.loss)),
        alpha_premium_low=_clip(s.wealth - w_safe_low),
    )


def expected_insurer_profit(menu, s):
    """Monopolist's expected premium income net of expected payouts."""
    high = (-(1.0 - s.eta_high_risk) * menu.alpha_attack_high
            + s.eta_high_risk * menu.alpha_premium_high)
    low = (-(1.0 - s.eta_low_risk) * menu.alpha_attack_low
           + s.eta_low_risk * menu.alpha_premium_low)
    return s.p_risky * high + (1.0 - s.p_risky) * low


def _profit_slope(ua_low, s):
    """Analytic derivative of menu profit along the participation line.

    Strictly decreasing in ``ua_low`` (the inverse utility W is convex), so
    the menu profit is concave and a sign change brackets the optimum.
    """
    u = s.utility
    eta_h, eta_l = s.eta_high_risk, s.eta_low_risk
    un_low = (_reservation(s) - (1.0 - eta_l) * ua_low) / eta_l
    m = (1.0 - eta_h) * ua_low + eta_h * un_low
    return (-s.p_risky * u.inverse_derivative(m) * (eta_l - eta_h) / eta_l
            - (1.0 - s.p_risky) * (1.0 - eta_l)
            * (u.inverse_derivative(ua_low) - u.inverse_derivative(un_low)))


def insurer_optimal_menu(s):
    """Profit-maximizing two-type menu under asymmetric information.

    One-dimensional search over the low type's attack-state utility level
    (between no insurance and full insurance on the participation line);
    everything else follows from the binding constraints and the Jensen
    full-insurance step.  Golden section locates the concave optimum and a
    slope bisection sharpens interior solutions to machine stationarity.
    Ties in profit resolve to the lowest low-type premium.  Returns the menu
    plus diagnostics.
    """
    u = s.utility
    lo = u.value(s.wealth - s.loss)
    hi = _reservation(s)
    if not lo < hi:
        raise InfeasibleError("empty search interval for the low-type contract")
    tol = 1e-11 * (1.0 + abs(hi - lo))

    def profit_at(ua_low):
        return expected_insurer_profit(_menu_from_ua_low(ua_low, s), s)

    if _profit_slope(lo, s) <= 0.0:
        best = lo
    elif _profit_slope(hi, s) >= 0.0:
        best = hi
    else:
        report = golden_section_max(profit_at, Interval(lo, hi), tol)
        b_lo = max(lo, report.x - 2.0 * tol)
        b_hi = min(hi, report.x + 2.0 * tol)
        if _profit_slope(b_lo, s) < 0.0:
            b_lo = lo
        if _profit_slope(b_hi, s) > 0.0:
            b_hi = hi
        for _ in range(100):
            mid = 0.5 * (b_lo + b_hi)
            if _profit_slope(mid, s) > 0.0:
                b_lo = mid
            else:
                b_hi = mid
        best = 0.5 * (b_lo + b_hi)
        # profit ties resolve toward the lowest low-type premium, i.e. the
        # smallest ua_low among tied candidates
        for candidate in (lo, hi):
            if profit_at(candidate) >= profit_at(best) - 1e-12 and candidate < best:
                best = candidate
    menu = _menu_from_ua_low(best, s)
    return menu, verify_menu(menu, s)


def insurer_oracle_menu(s, grid_points=DEFAULT_GRID_POINTS):
    """Two-dimensional grid referee for the menu problem.

    Grids the low contract along the binding participation line and, for
    each, the high contract along the binding self-selection line (two free
    scalars total, full insurance *not* imposed), checks the remaining
    original constraints, and returns the most profitable feasible point.
    """
    if grid_points < 201:
        raise DomainError("grid_points must be >= 201")
    u = s.utility
    eta_h, eta_l, p = s.eta_high_risk, s.eta_low_risk, s.p_risky
    u_noloss = u.value(s.wealth)
    u_loss = u.value(s.wealth - s.loss)
    r = _reservation(s)
    r_high = (1.0 - eta_h) * u_loss + eta_h * u_noloss

    ua_l_grid = np.linspace(u_loss, r, grid_points)
    best = (-math.inf, math.nan, math.nan)
    for ua_l in ua_l_grid:
        un_l = (r - (1.0 - eta_l) * ua_l) / eta_l
        m = (1.0 - eta_h) * ua_l + eta_h * un_l
        # high contract on the IC line: Un_h = (m - (1-eta_h) Ua_h) / eta_h,
        # restricted to nonnegative payouts and premiums
        ua_h_lo = max(u_loss, (m - eta_h * u_noloss) / (1.0 - eta_h))
        ua_h_hi = u_noloss
        if ua_h_hi <= ua_h_lo:
            continue
        ua_h = np.linspace(ua_h_lo, ua_h_hi, grid_points)
        un_h = (m - (1.0 - eta_h) * ua_h) / eta_h
        # remaining original constraints: low must not prefer the high
        # contract, high must beat its outside option
        eu_l_high = (1.0 - eta_l) * ua_h + eta_l * un_h
        feasible = (eu_l_high <= r + 1e-12) & (m >= r_high - 1e-12)
        if not feasible.any():
            continue
        w_ah = u.inverse_array(ua_h)
        w_nh = u.inverse_array(un_h)
        profit_h = -(1.0 - eta_h) * (w_ah - (s.wealth - s.loss)) \
            + eta_h * (s.wealth - w_nh)
        profit_l = -(1.0 - eta_l) * (u.inverse(ua_l) - (s.wealth - s.loss)) \
            + eta_l * (s.wealth - u.inverse(un_l))
        profit = np.where(feasible, p * profit_h + (1.0 - p) * profit_l, -math.inf)
        j = int(np.argmax(profit))
        if profit[j] > best[0]:
            best = (float(profit[j]), float(ua_l), float(ua_h[j]))
    if math.isnan(best[1]):
        raise InfeasibleError("no feasible menu on the oracle grid")
    _, ua_l, ua_h = best
    un_l = (r - (1.0 - eta_l) * ua_l) / eta_l
    m = (1.0 - eta_h) * ua_l + eta_h * un_l
    un_h = (m - (1.0 - eta_h) * ua_h) / eta_h
    eps = 1e-12 * (1.0 + s.wealth)

    def _clip(x):
        if -eps < x < 0.0:
            return 0.0
        return x

    return InsuranceMenu(
        alpha_attack_high=_clip(u.inverse(ua_h) - (s.wealth - s.loss)),
        alpha_premium_high=_clip(s.wealth - u.inverse(un_h)),
        alpha_attack_low=_clip(u.inverse(ua_l) - (s.wealth - s.loss)),
        alpha_premium_low=_clip(s.wealth - u.inverse(un_l)),
    )


def transformed_profit(ua_h, un_h, ua_l, un_l, s):
    """Menu profit as a function of the transformed utility levels.

    The published transformed expression carries an additive type-independent
    constant (with one undefined symbol); constants cannot move the argmax,
    so only the variable part is used here and reported profits always come
    from the untransformed form.
    """
    u = s.utility
    return (s.p_risky * (-s.eta_high_risk * u.inverse(un_h)
                         - (1.0 - s.eta_high_risk) * u.inverse(ua_h))
            + (1.0 - s.p_risky) * (-s.eta_low_risk * u.inverse(un_l)
                                   - (1.0 - s.eta_low_risk) * u.inverse(ua_l)))


def transformed_lagrangian(ua_h, un_h, ua_l, un_l, lam1, lam2, s):
    """Lagrangian of the transformed menu problem (both constraints binding)."""
    eta_h, eta_l = s.eta_high_risk, s.eta_low_risk
    ic_h = ((1.0 - eta_h) * ua_h + eta_h * un_h
            - (1.0 - eta_h) * ua_l - eta_h * un_l)
    ir_l = (1.0 - eta_l) * ua_l + eta_l * un_l - _reservation(s)
    return (transformed_profit(ua_h, un_h, ua_l, un_l, s)
            + lam1 * ic_h + lam2 * ir_l)


def verify_menu(menu, s, tol=1e-8):
    """Constraint residuals, insurance gaps, and recovered multipliers.

    Residuals are computed in transformed space; the multipliers come from
    the stationarity conditions in the high-type block (lambda1) and the
    low-type attack equation (lambda2).  The untested original inequalities
    (low type not preferring the high contract; high type clearing its
    outside option) are reported as slacks.
    """
    u = s.utility
    eta_h, eta_l = s.eta_high_risk, s.eta_low_risk
    ua_h = u.value(s.wealth - s.loss + menu.alpha_attack_high)
    un_h = u.value(s.wealth - menu.alpha_premium_high)
    ua_l = u.value(s.wealth - s.loss + menu.alpha_attack_low)
    un_l = u.value(s.wealth - menu.alpha_premium_low)
    ic_h = ((1.0 - eta_h) * ua_h + eta_h * un_h
            - (1.0 - eta_h) * ua_l - eta_h * un_l)
    ir_l = (1.0 - eta_l) * ua_l + eta_l * un_l - _reservation(s)
    lam1 = s.p_risky * u.inverse_derivative(ua_h)
    lam2 = ((1.0 - s.p_risky) * (1.0 - eta_l) * u.inverse_derivative(ua_l)
            + lam1 * (1.0 - eta_h)) / (1.0 - eta_l)
    eu_l_own = (1.0 - eta_l) * ua_l + eta_l * un_l
    eu_l_high = (1.0 - eta_l) * ua_h + eta_l * un_h
    eu_h_own = (1.0 - eta_h) * ua_h + eta_h * un_h
    r_high = (1.0 - eta_h) * u.value(s.wealth - s.loss) + eta_h * u.value(s.wealth)
    return MenuDiagnostics(
        ic_h_residual=ic_h,
        ir_l_residual=ir_l,
        full_insurance_gap_h=abs(s.loss - menu.alpha_attack_high
                                 - menu.alpha_premium_high),
        partial_insurance_margin_l=un_l - ua_l,
        lagrange_lambda1=lam1,
        lagrange_lambda2=lam2,
        ic_l_slack=eu_l_own - eu_l_high,
        ir_h_slack=eu_h_own - r_high,
    )
