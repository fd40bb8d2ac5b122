import math
from dataclasses import replace

import numpy as np
import pytest

from lapsekit import (
    Basis,
    Contract,
    G82M,
    LapseModel,
    MortalityModel,
    NumericalBlowupError,
    PremiumForm,
    SurrenderRule,
    ValidationError,
    current_cost_premium,
    lidstone_equivalent_basis,
    mortality_hazard,
    solve_level_premium,
    solve_policy_value,
)

NO_DECREMENTS = Basis(0.0, MortalityModel.constant(0.0), LapseModel.zero())

#: Reference premiums at 2 dp for the baseline contract, keyed by the
#: effective force of interest of a zero-lapse basis.
REFERENCE_PREMIUMS = {
    0.03: 3744.44,
    0.045: 2919.43,
    0.06: 2321.62,
    0.075: 1892.86,
    0.09: 1586.02,
    0.105: 1365.40,
    0.12: 1205.15,
    0.15: 998.73,
}


def pure_endowment(term=10.0, maturity=100.0):
    return Contract(entry_age=30.0, term=term, sum_insured=0.0, maturity=maturity)


class TestSolvePolicyValue:
    def test_no_discounting_no_decrements(self):
        pf = solve_policy_value(pure_endowment(), NO_DECREMENTS, 0.0, step=1 / 48)
        assert np.allclose(pf.value, 100.0, atol=1e-12)

    def test_pure_discount(self):
        basis = Basis(0.05, MortalityModel.constant(0.0), LapseModel.zero())
        pf = solve_policy_value(pure_endowment(), basis, 0.0)
        assert pf.value[0] == pytest.approx(100.0 * math.exp(-0.5), rel=1e-10)

    def test_terminal_boundary_exact(self, term_to_100, plain_basis):
        pf = solve_policy_value(term_to_100, plain_basis, 3744.44)
        assert pf.value[-1] == term_to_100.maturity

    def test_reference_premium_near_equivalence(self, term_to_100, plain_basis):
        # the 2dp reference premium is itself rounded: the exact fair rate is
        # 3744.4746, so the best attainable repricing residual is ~0.77
        pf = solve_policy_value(term_to_100, plain_basis, 3744.44)
        assert abs(pf.value[0]) <= 1.0

    def test_blowup_names_duration(self, term_to_100, plain_basis):
        def premium(t):
            return np.where(np.asarray(t) > 30.0, np.nan, 0.0)

        with pytest.raises(NumericalBlowupError) as err:
            solve_policy_value(term_to_100, plain_basis, premium)
        assert err.value.duration is not None


class TestLevelPremium:
    def test_reference_values(self, term_to_100):
        for delta in (0.03, 0.06, 0.09):
            premium = solve_level_premium(term_to_100, Basis(delta, G82M, LapseModel.zero()))
            assert premium == pytest.approx(REFERENCE_PREMIUMS[delta], rel=2e-3)

    def test_lapse_supported_reference(self, term_to_100, supported_basis):
        premium = solve_level_premium(term_to_100, supported_basis)
        assert premium == pytest.approx(1586.02, rel=2e-3)

    def test_no_decrement_degenerate_case(self):
        premium = solve_level_premium(pure_endowment(), NO_DECREMENTS, step=1 / 48)
        assert premium == pytest.approx(10.0, rel=1e-10)

    def test_premium_ordering(self, term_to_100):
        # lapse support can only cheapen the premium when 0 <= C <= V*
        for delta in (0.03, 0.06, 0.09):
            plain = solve_level_premium(term_to_100, Basis(delta, G82M, LapseModel.zero()))
            for nu in (0.03, 0.06):
                for k in (0.0, 0.5, 1.0):
                    rule = (
                        SurrenderRule.zero()
                        if k == 0.0
                        else SurrenderRule.proportion_of_value(k)
                    )
                    supported = solve_level_premium(
                        replace(term_to_100, surrender_rule=rule),
                        Basis(delta, G82M, LapseModel.constant(nu)),
                    )
                    assert supported <= plain + 1e-9

    def test_affinity_of_initial_value(self, term_to_100, supported_basis):
        values = [
            solve_policy_value(term_to_100, supported_basis, p).value[0] for p in (0.0, 1.0, 2.0)
        ]
        slope1 = values[1] - values[0]
        slope2 = values[2] - values[1]
        assert slope2 == pytest.approx(slope1, rel=1e-10)

    @pytest.mark.parametrize(
        "basis",
        [
            Basis(0.03, G82M, LapseModel.zero()),
            Basis(0.06, G82M, LapseModel.zero()),
            Basis(0.09, G82M, LapseModel.zero()),
            Basis(0.03, G82M, LapseModel.constant(0.06)),
        ],
        ids=["d03", "d06", "d09", "d03-lapse"],
    )
    def test_grid_refinement_convergence(self, term_to_100, basis):
        coarse = solve_level_premium(term_to_100, basis, step=1 / 240)
        fine = solve_level_premium(term_to_100, basis, step=1 / 480)
        assert abs(fine - coarse) / coarse < 1e-6

    def test_mortality_cost_form_rejected(self, plain_basis):
        contract = Contract(
            entry_age=35.0,
            term=65.0,
            sum_insured=1.0,
            maturity=0.0,
            premium_form=PremiumForm.MORTALITY_COST,
        )
        with pytest.raises(ValidationError):
            solve_level_premium(contract, plain_basis)


class TestCurrentCost:
    def contract(self):
        return Contract(
            entry_age=35.0,
            term=65.0,
            sum_insured=250_000.0,
            maturity=0.0,
            premium_form=PremiumForm.MORTALITY_COST,
        )

    def test_premium_is_mortality_cost(self, supported_basis):
        pf = current_cost_premium(self.contract(), supported_basis)
        assert pf.premium[0] == pytest.approx(mortality_hazard(G82M, 35.0) * 250_000.0)

    def test_value_identically_zero(self, supported_basis):
        pf = current_cost_premium(self.contract(), supported_basis)
        assert np.all(pf.value == 0.0)

    def test_linear_in_mortality_scale(self, supported_basis):
        base = current_cost_premium(self.contract(), supported_basis)
        scaled_basis = Basis(
            supported_basis.delta,
            MortalityModel.scaled(supported_basis.mortality, 5.0),
            supported_basis.lapse,
        )
        scaled = current_cost_premium(self.contract(), scaled_basis)
        assert np.allclose(scaled.premium, 5.0 * base.premium, rtol=1e-14)

    def test_maturity_rejected(self, supported_basis):
        with pytest.raises(ValidationError):
            current_cost_premium(
                Contract(entry_age=35.0, term=65.0, sum_insured=1.0, maturity=1.0),
                supported_basis,
            )


class TestLidstoneEquivalence:
    def test_transform_values(self):
        basis = Basis(0.03, G82M, LapseModel.constant(0.06))
        assert lidstone_equivalent_basis(basis, 0.0).delta == pytest.approx(0.09)
        basis2 = Basis(0.03, G82M, LapseModel.constant(0.03))
        assert lidstone_equivalent_basis(basis2, 0.5).delta == pytest.approx(0.045)
        assert lidstone_equivalent_basis(basis, 1.0).delta == pytest.approx(0.03)

    def test_premium_equivalence(self, term_to_100):
        # proportional surrender designs price identically to a raised force
        # of interest with no lapses
        for k in (0.0, 0.25, 0.5, 1.0):
            rule = SurrenderRule.zero() if k == 0.0 else SurrenderRule.proportion_of_value(k)
            basis = Basis(0.03, G82M, LapseModel.constant(0.06))
            direct = solve_level_premium(replace(term_to_100, surrender_rule=rule), basis)
            equivalent = solve_level_premium(term_to_100, lidstone_equivalent_basis(basis, k))
            assert abs(direct - equivalent) / equivalent < 1e-8

    def test_k_one_neutrality_exact(self, term_to_100, supported_basis):
        full = solve_level_premium(
            replace(term_to_100, surrender_rule=SurrenderRule.proportion_of_value(1.0)),
            supported_basis,
        )
        plain = solve_level_premium(term_to_100, supported_basis.without_lapses())
        assert full == plain
