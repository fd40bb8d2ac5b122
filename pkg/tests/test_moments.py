import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapsekit import (
    Basis,
    Contract,
    G82M,
    LapseModel,
    MortalityModel,
    SurrenderRule,
    ValidationError,
    mixture_variance,
    simulate_policy,
    solve_level_premium,
    unit_loss_moments,
)


@pytest.fixture(scope="module")
def fair_setup():
    basis = Basis(0.05, G82M, LapseModel.constant(0.06))
    contract = Contract(entry_age=35.0, term=65.0, sum_insured=250_000.0, maturity=250_000.0)
    premium = solve_level_premium(contract, basis)
    return contract, basis, premium


class TestUnitLossMoments:
    def test_fair_premium_has_zero_mean(self, fair_setup):
        contract, basis, premium = fair_setup
        moments = unit_loss_moments(contract, premium, basis)
        assert abs(moments.m1) < 1e-6

    def test_deterministic_cashflow(self):
        contract = Contract(entry_age=30.0, term=10.0, sum_insured=1.0, maturity=100.0)
        basis = Basis(0.0, MortalityModel.constant(0.0), LapseModel.zero())
        moments = unit_loss_moments(contract, 0.0, basis, step=1 / 48)
        assert moments.m1 == pytest.approx(100.0, rel=1e-10)
        assert moments.m2 == pytest.approx(10_000.0, rel=1e-10)
        assert moments.variance == pytest.approx(0.0, abs=1e-6)

    def test_underpriced_high_risk_class_loses(self, fair_setup):
        contract, basis, premium = fair_setup
        high = Basis(0.05, MortalityModel.scaled(G82M, 5.0), LapseModel.zero())
        moments = unit_loss_moments(contract, premium, high)
        assert moments.m1 > 0.0

    def test_variance_floor(self, fair_setup):
        contract, basis, premium = fair_setup
        moments = unit_loss_moments(contract, premium, basis)
        assert moments.variance >= -1e-9 * abs(moments.m2)

    def test_first_order_only(self, fair_setup):
        contract, basis, premium = fair_setup
        moments = unit_loss_moments(contract, premium, basis, order=1)
        assert math.isnan(moments.m2)

    def test_proportional_surrender_needs_path(self, fair_setup):
        contract, basis, premium = fair_setup
        from dataclasses import replace

        ruled = replace(contract, surrender_rule=SurrenderRule.proportion_of_value(1.0))
        with pytest.raises(ValidationError):
            unit_loss_moments(ruled, premium, basis)

    @given(scale_power=st.integers(min_value=-2, max_value=4))
    @settings(max_examples=10)
    def test_joint_scaling_leaves_unit_moments_fixed(self, scale_power):
        # scaling benefits and premium together is a pure change of unit
        lam = 2.0**scale_power
        basis = Basis(0.04, MortalityModel.constant(0.01), LapseModel.constant(0.03))
        base = Contract(entry_age=30.0, term=5.0, sum_insured=1000.0, maturity=500.0)
        scaled = Contract(
            entry_age=30.0, term=5.0, sum_insured=lam * 1000.0, maturity=lam * 500.0
        )
        m_base = unit_loss_moments(base, 20.0, basis, step=1 / 48)
        m_scaled = unit_loss_moments(scaled, lam * 20.0, basis, step=1 / 48)
        assert m_scaled.m1 == m_base.m1
        assert m_scaled.m2 == m_base.m2


class TestMixtureVariance:
    def test_single_class(self):
        from lapsekit import LossMoments

        m = LossMoments(m1=0.2, m2=0.3, variance=0.3 - 0.04)
        mix = mixture_variance([(1.0, 100.0, m)])
        assert mix.mean == pytest.approx(100.0 * 0.2)
        assert mix.variance == pytest.approx(100.0**2 * (0.3 - 0.04))

    def test_two_class_formula(self):
        from lapsekit import LossMoments

        low = LossMoments(m1=-0.1, m2=0.2, variance=0.19)
        high = LossMoments(m1=0.4, m2=0.5, variance=0.34)
        p, sl, sh = 0.001, 1.0, 10.0
        mix = mixture_variance([(1.0 - p, sl, low), (p, sh, high)])
        mean = (1 - p) * sl * -0.1 + p * sh * 0.4
        var = (1 - p) * sl**2 * 0.2 + p * sh**2 * 0.5 - mean**2
        assert mix.mean == pytest.approx(mean, rel=1e-14)
        assert mix.variance == pytest.approx(var, rel=1e-14)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            mixture_variance([])

    def test_weights_must_sum_to_one(self):
        from lapsekit import LossMoments

        m = LossMoments(m1=0.0, m2=0.0, variance=0.0)
        with pytest.raises(ValidationError):
            mixture_variance([(0.5, 1.0, m)])


class TestSimulatePolicy:
    def test_deterministic_contract_has_zero_variance(self):
        contract = Contract(entry_age=30.0, term=10.0, sum_insured=1.0, maturity=100.0)
        basis = Basis(0.0, MortalityModel.constant(0.0), LapseModel.zero())
        sim = simulate_policy(contract, 0.0, basis, 10_000, seed=1, step=1 / 48)
        assert sim.variance == 0.0
        assert sim.mean == pytest.approx(100.0, rel=1e-12)

    def test_fair_premium_unbiased(self, fair_setup):
        contract, basis, premium = fair_setup
        sim = simulate_policy(contract, premium, basis, 200_000, seed=11)
        assert abs(sim.mean) < 3.0 * sim.std_error_mean

    def test_matches_moment_ode(self, fair_setup):
        contract, basis, premium = fair_setup
        high = Basis(0.05, MortalityModel.scaled(G82M, 5.0), LapseModel.zero())
        analytic = unit_loss_moments(contract, premium, high)
        sim = simulate_policy(contract, premium, high, 200_000, seed=5)
        assert abs(analytic.m1 - sim.mean) < 3.0 * sim.std_error_mean
        assert abs(math.sqrt(analytic.variance) - math.sqrt(sim.variance)) < 3.0 * sim.std_error_sd

    def test_reproducible_for_fixed_seed(self, fair_setup):
        contract, basis, premium = fair_setup
        a = simulate_policy(contract, premium, basis, 50_000, seed=123)
        b = simulate_policy(contract, premium, basis, 50_000, seed=123)
        assert a == b

    def test_path_count_validated(self, fair_setup):
        contract, basis, premium = fair_setup
        with pytest.raises(ValidationError):
            simulate_policy(contract, premium, basis, 0, seed=1)


class TestRouteConsistency:
    def test_mixture_mean_equals_surplus_epv(self):
        # two independent routes to the expected loss: backward moment ODEs
        # per class versus attrition-weighted surplus EPVs
        from lapsekit import Case, build_regime, scenario_epv, subpopulation_pair

        pricing = Basis(0.05, G82M, LapseModel.constant(0.06))
        contract = Contract(
            entry_age=35.0, term=65.0, sum_insured=250_000.0, maturity=250_000.0
        )
        regime = build_regime(Case.CASE2, contract, pricing)
        specs = subpopulation_pair(5.0, "differential", 10.0, 0.001)
        result = scenario_epv(Case.CASE2, specs, pricing, contract, regime=regime)

        premium = float(regime.level_premium)
        normal = unit_loss_moments(contract, premium, Basis(0.05, G82M, LapseModel.constant(0.06)))
        high = unit_loss_moments(
            contract, premium, Basis(0.05, MortalityModel.scaled(G82M, 5.0), LapseModel.zero())
        )
        mix = mixture_variance(
            [(0.999, 250_000.0, normal), (0.001, 10.0 * 250_000.0, high)]
        )
        assert mix.mean == pytest.approx(-result.epv_loss, abs=1e-6 * 250_000.0)
