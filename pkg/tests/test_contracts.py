import pytest
from hypothesis import given, strategies as st

from lapsekit import Contract, PremiumForm, SurrenderRule, ValidationError, surrender_value


class TestSurrenderRule:
    def test_zero_rule(self):
        assert surrender_value(SurrenderRule.zero(), 12.0, 5000.0) == 0.0

    def test_full_distribution(self):
        rule = SurrenderRule.proportion_of_value(1.0)
        assert surrender_value(rule, 10.0, 5000.0) == 5000.0

    def test_half_distribution(self):
        rule = SurrenderRule.proportion_of_value(0.5)
        assert surrender_value(rule, 10.0, 5000.0) == 2500.0

    def test_k_validated_at_construction(self):
        with pytest.raises(ValidationError):
            SurrenderRule.proportion_of_value(1.5)
        with pytest.raises(ValidationError):
            SurrenderRule.proportion_of_value(-0.1)

    @given(
        k=st.floats(min_value=0.0, max_value=1.0),
        lo=st.floats(min_value=0.0, max_value=1e6),
        hi=st.floats(min_value=0.0, max_value=1e6),
    )
    def test_monotone_in_policy_value(self, k, lo, hi):
        lo, hi = sorted((lo, hi))
        rule = SurrenderRule.proportion_of_value(k)
        a = surrender_value(rule, 1.0, lo)
        b = surrender_value(rule, 1.0, hi)
        assert a <= b
        assert 0.0 <= b <= hi


class TestContract:
    def test_valid(self, term_to_100):
        assert term_to_100.end_age == 100.0
        assert term_to_100.premium_form == PremiumForm.LEVEL

    def test_term_positive(self):
        with pytest.raises(ValidationError):
            Contract(entry_age=35.0, term=0.0, sum_insured=1.0, maturity=0.0)

    def test_cover_within_age_ceiling(self):
        with pytest.raises(ValidationError):
            Contract(entry_age=80.0, term=50.0, sum_insured=1.0, maturity=0.0)

    def test_negative_amounts_rejected(self):
        with pytest.raises(ValidationError):
            Contract(entry_age=35.0, term=65.0, sum_insured=-1.0, maturity=0.0)

    def test_mortality_cost_requires_zero_surrender(self):
        with pytest.raises(ValidationError):
            Contract(
                entry_age=35.0,
                term=65.0,
                sum_insured=1.0,
                maturity=0.0,
                surrender_rule=SurrenderRule.proportion_of_value(0.5),
                premium_form=PremiumForm.MORTALITY_COST,
            )
