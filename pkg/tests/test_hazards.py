import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lapsekit import (
    Basis,
    DomainError,
    G82M,
    LapseModel,
    MortalityModel,
    ValidationError,
    constant_lapse_rate,
    duration_grid,
    lapse_hazard,
    mortality_hazard,
    survivorship_discount,
)


class TestMortalityModel:
    def test_makeham_at_age_zero(self):
        model = MortalityModel.makeham(alpha=0.0005, beta=7.5858e-5, c=10**0.038)
        assert mortality_hazard(model, 0.0) == pytest.approx(0.00057586, abs=1e-8)

    def test_scaled_identity(self):
        scaled = MortalityModel.scaled(G82M, 1.0)
        for age in (0.0, 35.0, 77.5, 120.0):
            assert mortality_hazard(scaled, age) == mortality_hazard(G82M, age)

    def test_scaled_multiplies(self):
        scaled = MortalityModel.scaled(G82M, 5.0)
        assert mortality_hazard(scaled, 35.0) == pytest.approx(
            5.0 * mortality_hazard(G82M, 35.0), rel=1e-15
        )

    def test_scaled_ratio_exact_at_random_ages(self):
        rng = np.random.default_rng(7)
        factor = 3.7
        scaled = MortalityModel.scaled(G82M, factor)
        ages = rng.uniform(0.0, 120.0, size=50)
        ratio = mortality_hazard(scaled, ages) / mortality_hazard(G82M, ages)
        assert np.allclose(ratio, factor, rtol=1e-14, atol=0.0)

    def test_age_domain(self):
        with pytest.raises(DomainError):
            mortality_hazard(G82M, -1.0)
        with pytest.raises(DomainError):
            mortality_hazard(G82M, 121.0)

    def test_bad_parameters_rejected(self):
        with pytest.raises(ValidationError):
            MortalityModel.makeham(alpha=0.0, beta=1.0, c=0.0)
        with pytest.raises(ValidationError):
            MortalityModel.makeham(alpha=-1.0, beta=0.0, c=1.0)
        with pytest.raises(ValidationError):
            MortalityModel.scaled(G82M, -0.5)
        with pytest.raises(ValidationError):
            MortalityModel(kind="gompertz")


class TestLapseModel:
    def test_zero_kind(self):
        assert lapse_hazard(LapseModel.zero(), 12.3) == 0.0

    def test_constant_kind(self):
        model = LapseModel.constant(0.06)
        t = np.linspace(0.0, 65.0, 11)
        assert np.all(lapse_hazard(model, t) == 0.06)

    def test_scaled_kind(self):
        model = LapseModel.scaled(LapseModel.constant(0.06), 0.5)
        assert lapse_hazard(model, 3.0) == pytest.approx(0.03)
        assert constant_lapse_rate(model) == pytest.approx(0.03)

    def test_constant_rate_helper(self):
        assert constant_lapse_rate(LapseModel.zero()) == 0.0
        assert constant_lapse_rate(LapseModel.constant(0.06)) == 0.06

    def test_negative_rate_rejected(self):
        with pytest.raises(ValidationError):
            LapseModel.constant(-0.01)


class TestSurvivorshipDiscount:
    def test_empty_integral(self):
        basis = Basis(0.05, G82M, LapseModel.constant(0.06))
        assert survivorship_discount(basis, 0.0) == 1.0

    def test_pure_interest(self):
        basis = Basis(0.05, MortalityModel.constant(0.0), LapseModel.zero())
        assert survivorship_discount(basis, 10.0) == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_constant_hazards_closed_form(self):
        basis = Basis(0.05, MortalityModel.constant(0.01), LapseModel.constant(0.06))
        assert survivorship_discount(basis, 10.0) == pytest.approx(math.exp(-1.2), rel=1e-12)

    def test_negative_duration(self):
        basis = Basis(0.05, G82M, LapseModel.zero())
        with pytest.raises(DomainError):
            survivorship_discount(basis, -0.5)

    def test_off_grid_duration_uses_partial_cell(self):
        basis = Basis(0.05, MortalityModel.constant(0.01), LapseModel.constant(0.06))
        assert survivorship_discount(basis, 0.01) == pytest.approx(
            math.exp(-0.12 * 0.01), rel=1e-12
        )

    def test_strictly_decreasing(self):
        basis = Basis(0.03, G82M, LapseModel.constant(0.03))
        ts = np.linspace(0.0, 60.0, 25)
        values = [survivorship_discount(basis, t, entry_age=35.0) for t in ts]
        assert all(b < a for a, b in zip(values, values[1:]))

    @given(
        s=st.integers(min_value=0, max_value=4800),
        t=st.integers(min_value=0, max_value=4800),
    )
    def test_semigroup_on_grid(self, s, t):
        # grid-aligned split points; entry age chosen so ages stay in range
        step = 1.0 / 240.0
        basis = Basis(0.04, G82M, LapseModel.constant(0.05))
        ts, tt = s * step, t * step
        whole = survivorship_discount(basis, ts + tt, entry_age=30.0)
        first = survivorship_discount(basis, ts, entry_age=30.0)
        second = survivorship_discount(basis, tt, entry_age=30.0 + ts)
        assert whole == pytest.approx(first * second, abs=1e-10)


class TestDurationGrid:
    def test_alignment(self):
        grid = duration_grid(65.0, 1.0 / 240.0)
        assert len(grid) == 65 * 240 + 1
        assert grid[0] == 0.0
        assert grid[-1] == 65.0

    def test_misaligned_term_rejected(self):
        with pytest.raises(ValidationError):
            duration_grid(1.0, 0.3)

    def test_bad_term_rejected(self):
        with pytest.raises(ValidationError):
            duration_grid(0.0)
