"""Coverage choice and insurer menu against grid oracles and the KKT system."""

import math

import numpy as np
import pytest

from conftest import random_insurance_scenario, random_utility
from gridveil.errors import DomainError
from gridveil.insurance import (
    ConsumerInsuranceProblem,
    InsuranceMenu,
    InsuranceScenario,
    UtilityFamily,
    consumer_optimal_coverage,
    expected_insurer_profit,
    insurer_optimal_menu,
    insurer_oracle_menu,
    kkt_residual,
    objective_value,
    transformed_lagrangian,
    verify_menu,
)

LOG = UtilityFamily("logarithmic")


class TestUtilityFamilies:
    @pytest.mark.parametrize("family", [
        UtilityFamily("logarithmic"),
        UtilityFamily("exponential", 0.35),
        UtilityFamily("power", 0.5),
        UtilityFamily("power", 2.0),
    ])
    def test_normalized_increasing_concave(self, family):
        assert family.value(0.0) == 0.0
        ws = np.linspace(max(family.wealth_floor + 0.05, -0.9), 20.0, 300)
        vals = [family.value(w) for w in ws]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        derivs = [family.derivative(w) for w in ws]
        assert all(b < a for a, b in zip(derivs, derivs[1:]))

    @pytest.mark.parametrize("family", [
        UtilityFamily("logarithmic"),
        UtilityFamily("exponential", 0.35),
        UtilityFamily("power", 0.5),
        UtilityFamily("power", 2.0),
    ])
    def test_inverse_round_trip(self, family):
        for w in np.linspace(max(family.wealth_floor + 0.01, -0.95), 30.0, 200):
            back = family.inverse(family.value(w))
            assert abs(back - w) <= 1e-10 * max(1.0, abs(w))

    def test_inverse_derivative_consistency(self, rng):
        for _ in range(40):
            family = random_utility(rng)
            w = float(rng.uniform(0.1, 15.0))
            v = family.value(w)
            ref = 1.0 / family.derivative(w)
            assert abs(family.inverse_derivative(v) - ref) <= 1e-10 * max(1.0, ref)

    def test_validation(self):
        with pytest.raises(DomainError):
            UtilityFamily("cubic")
        with pytest.raises(DomainError):
            UtilityFamily("exponential", -1.0)
        with pytest.raises(DomainError):
            UtilityFamily("power", 1.0)
        with pytest.raises(DomainError):
            LOG.value(-1.0)


class TestConsumerCoverage:
    def test_fair_premium_buys_full_coverage(self):
        prob = ConsumerInsuranceProblem(10.0, 5.0, 0.8, 0.2, LOG)
        assert abs(consumer_optimal_coverage(prob) - 5.0) <= 1e-6

    def test_log_worked_example(self):
        # closed form: the stationarity condition 0.24(6+0.7b)=0.14(11-0.3b)
        # solves to b = 10/21
        prob = ConsumerInsuranceProblem(10.0, 5.0, 0.8, 0.3, LOG)
        beta = consumer_optimal_coverage(prob)
        assert abs(beta - 0.47619) <= 1e-5
        assert abs(kkt_residual(beta, prob)) <= 1e-8

    def test_log_example_against_dense_grid(self):
        prob = ConsumerInsuranceProblem(10.0, 5.0, 0.8, 0.3, LOG)
        grid = np.linspace(0.0, prob.loss / prob.premium_rate, 2_000_001)
        vals = prob.eta * np.log1p(prob.wealth - grid * prob.premium_rate) \
            + (1 - prob.eta) * np.log1p(
                prob.wealth + (1 - prob.premium_rate) * grid - prob.loss)
        best = grid[int(np.argmax(vals))]
        assert abs(consumer_optimal_coverage(prob) - best) <= 2e-5

    def test_corner_at_steep_premium(self):
        prob = ConsumerInsuranceProblem(10.0, 5.0, 0.8, 0.9, LOG)
        assert kkt_residual(0.0, prob) <= 0.0
        assert consumer_optimal_coverage(prob) == 0.0

    def test_fair_residual_zero_at_loss(self, rng):
        for _ in range(50):
            family = random_utility(rng)
            y = float(rng.uniform(5.0, 15.0))
            loss = float(rng.uniform(0.2, 0.9)) * y
            eta = float(rng.uniform(0.3, 0.95))
            prob = ConsumerInsuranceProblem(y, loss, eta, 1.0 - eta, family)
            assert abs(kkt_residual(loss, prob)) <= 1e-10
            assert abs(consumer_optimal_coverage(prob) - loss) <= 1e-6

    def test_unfair_premium_underinsures(self, rng):
        for _ in range(50):
            family = random_utility(rng)
            y = float(rng.uniform(5.0, 15.0))
            loss = float(rng.uniform(0.2, 0.9)) * y
            eta = float(rng.uniform(0.3, 0.9))
            c = 1.0 - eta + float(rng.uniform(0.005, 0.5)) * eta
            prob = ConsumerInsuranceProblem(y, loss, eta, min(c, 0.99), family)
            beta = consumer_optimal_coverage(prob)
            assert beta < loss - 1e-9
            assert kkt_residual(loss, prob) < 0.0

    def test_demand_monotone_in_premium(self):
        prob0 = ConsumerInsuranceProblem(10.0, 5.0, 0.8, 0.2, LOG)
        betas = []
        for c in np.linspace(1.0 - prob0.eta, 0.95, 30):
            prob = ConsumerInsuranceProblem(10.0, 5.0, 0.8, float(c), LOG)
            betas.append(consumer_optimal_coverage(prob))
        assert all(b <= a + 1e-9 for a, b in zip(betas, betas[1:]))

    def test_objective_concave_along_range(self, rng):
        prob = ConsumerInsuranceProblem(10.0, 4.0, 0.7, 0.4, LOG)
        bs = np.linspace(0.0, prob.loss / prob.premium_rate, 200)
        vals = [objective_value(b, prob) for b in bs]
        second = np.diff(vals, 2)
        assert np.all(second <= 1e-10)

    def test_domain_violation_names_wealth(self):
        prob = ConsumerInsuranceProblem(0.5, 0.5, 0.5, 0.5,
                                        UtilityFamily("power", 2.0))
        with pytest.raises(DomainError):
            kkt_residual(-1.0, prob)


class TestInsurerMenu:
    SCENARIO = InsuranceScenario(10.0, 5.0, 0.6, 0.9, 0.3, LOG)

    def test_high_type_fully_insured(self):
        menu, diag = insurer_optimal_menu(self.SCENARIO)
        assert diag.full_insurance_gap_h <= 1e-6
        assert abs(self.SCENARIO.loss - menu.alpha_attack_high
                   - menu.alpha_premium_high) <= 1e-6

    def test_low_type_partially_insured(self):
        _, diag = insurer_optimal_menu(self.SCENARIO)
        assert diag.partial_insurance_margin_l > 0.0

    def test_binding_and_slack_constraints(self):
        _, diag = insurer_optimal_menu(self.SCENARIO)
        assert abs(diag.ic_h_residual) <= 1e-8
        assert abs(diag.ir_l_residual) <= 1e-8
        assert diag.ic_l_slack >= -1e-8
        assert diag.ir_h_slack >= -1e-8

    def test_profit_beats_oracle(self):
        menu, _ = insurer_optimal_menu(self.SCENARIO)
        oracle = insurer_oracle_menu(self.SCENARIO, 1001)
        assert (expected_insurer_profit(menu, self.SCENARIO)
                >= expected_insurer_profit(oracle, self.SCENARIO) - 1e-4)

    def test_oracle_discovers_full_insurance(self):
        # the oracle's high contract is free to be anywhere on the binding
        # self-selection line; full insurance must emerge on its own
        s = InsuranceScenario(10.0, 5.0, 0.55, 0.75, 0.15, LOG)
        oracle = insurer_oracle_menu(s, 1001)
        assert abs(s.loss - oracle.alpha_attack_high
                   - oracle.alpha_premium_high) <= 2.0 * s.loss / 1000.0

    def test_type_collapse_continuous(self):
        base = InsuranceScenario(10.0, 5.0, 0.9 - 1e-4, 0.9, 0.3, LOG)
        menu, _ = insurer_optimal_menu(base)
        assert abs(menu.alpha_attack_high - menu.alpha_attack_low) <= 0.02
        assert abs(menu.alpha_premium_high - menu.alpha_premium_low) <= 0.02
        # limit: single-type monopoly full insurance at the reservation level
        u = base.utility
        r = (1 - base.eta_low_risk) * u.value(5.0) \
            + base.eta_low_risk * u.value(10.0)
        single_profit = (1 - base.eta_low_risk) * 5.0 \
            + base.eta_low_risk * 10.0 - u.inverse(r)
        got = expected_insurer_profit(menu, base)
        assert abs(got - single_profit) <= 1e-3

    def test_positive_profit(self):
        menu, _ = insurer_optimal_menu(self.SCENARIO)
        assert expected_insurer_profit(menu, self.SCENARIO) > 0.0

    def test_vanishing_risky_share_gives_low_type_full_information(self):
        # with almost no risky consumers the safe type's contract approaches
        # its full-information form: participation binding, full insurance
        s = InsuranceScenario(10.0, 5.0, 0.55, 0.75, 1e-4, LOG)
        menu, diag = insurer_optimal_menu(s)
        assert abs(s.loss - menu.alpha_attack_low - menu.alpha_premium_low) <= 1e-2
        assert abs(diag.ir_l_residual) <= 1e-8
        oracle = insurer_oracle_menu(s, 1001)
        assert abs(s.loss - oracle.alpha_attack_low
                   - oracle.alpha_premium_low) <= 2.0 * s.loss / 1000.0

    def test_zero_menu_zero_profit(self):
        menu = InsuranceMenu(0.0, 0.0, 0.0, 0.0)
        assert expected_insurer_profit(menu, self.SCENARIO) == 0.0

    def test_fair_single_type_contract_breaks_even(self):
        # full insurance priced at the attack probability nets nothing
        s = self.SCENARIO
        eta = s.eta_high_risk
        c = 1.0 - eta
        beta = s.loss
        menu = InsuranceMenu((1 - c) * beta, c * beta, 0.0, 0.0)
        profit_high_share = (-(1 - eta) * menu.alpha_attack_high
                             + eta * menu.alpha_premium_high)
        assert abs(profit_high_share) <= 1e-12

    def test_constructed_violation_detected(self):
        menu, _ = insurer_optimal_menu(self.SCENARIO)
        bumped = InsuranceMenu(menu.alpha_attack_high, menu.alpha_premium_high,
                               menu.alpha_attack_low,
                               menu.alpha_premium_low + 0.1)
        diag = verify_menu(bumped, self.SCENARIO)
        assert diag.ir_l_residual < 0.0


class TestRandomScenarioInvariants:
    def test_structure_and_oracle_agreement(self, rng):
        for _ in range(25):
            s = random_insurance_scenario(rng)
            menu, diag = insurer_optimal_menu(s)
            assert diag.full_insurance_gap_h <= 1e-6
            assert diag.partial_insurance_margin_l > 0.0
            oracle = insurer_oracle_menu(s, 401)
            assert (expected_insurer_profit(menu, s)
                    >= expected_insurer_profit(oracle, s) - 1e-3)

    def test_lagrangian_stationarity(self, rng):
        for _ in range(25):
            s = random_insurance_scenario(rng)
            menu, diag = insurer_optimal_menu(s)
            if menu.alpha_attack_low <= 1e-9:
                # low type priced out: the interior stationarity system
                # does not apply at the boundary
                continue
            u = s.utility
            point = [u.value(s.wealth - s.loss + menu.alpha_attack_high),
                     u.value(s.wealth - menu.alpha_premium_high),
                     u.value(s.wealth - s.loss + menu.alpha_attack_low),
                     u.value(s.wealth - menu.alpha_premium_low)]
            h = 1e-6
            grad = []
            for i in range(4):
                up, dn = point.copy(), point.copy()
                up[i] += h
                dn[i] -= h
                grad.append((transformed_lagrangian(
                    *up, diag.lagrange_lambda1, diag.lagrange_lambda2, s)
                    - transformed_lagrangian(
                        *dn, diag.lagrange_lambda1, diag.lagrange_lambda2, s))
                    / (2 * h))
            assert np.linalg.norm(grad) <= 1e-5

    def test_original_inequalities_hold(self, rng):
        for _ in range(25):
            s = random_insurance_scenario(rng)
            menu, diag = insurer_optimal_menu(s)
            assert diag.ic_l_slack >= -1e-8
            assert diag.ir_h_slack >= -1e-8
            assert abs(diag.ic_h_residual) <= 1e-8
            assert abs(diag.ir_l_residual) <= 1e-8
