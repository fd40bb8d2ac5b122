"""Backward policy-value ODE solver and equivalence-principle premiums.

The policy value V on a basis (delta, mu, nu) with premium rate P, sum
insured S, surrender value C, and maturity value M satisfies

    dV/dt = delta * V + P(t) - mu * (S - V) - nu * (C(t) - V),   V(n) = M.

With a surrender value that is a fixed proportion k of the value itself,
the lapse term folds into the interest term, giving the same equation with
the force of interest raised by (1 - k) * nu and no lapse term.  The solver
always uses that substitution, so proportional surrender designs are handled
exactly rather than by fixed-point iteration.

Integration is classical fixed-step RK4 run backward from the maturity
boundary on the shared uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from .contracts import Contract, PremiumForm
from .errors import NumericalBlowupError, UnsupportedModelError, ValidationError
from .hazards import (
    DEFAULT_STEP,
    Basis,
    LapseModel,
    constant_lapse_rate,
    duration_grid,
    lapse_hazard,
    mortality_hazard,
)

PremiumLike = Union[float, Callable[[np.ndarray], np.ndarray], np.ndarray]


class Regime(str, Enum):
    LEVEL_NO_LAPSE_SUPPORT = "level_no_lapse_support"
    LEVEL_LAPSE_SUPPORTED = "level_lapse_supported"
    CURRENT_COST = "current_cost"


@dataclass(frozen=True)
class PolicyFunctions:
    """Premium and policy-value paths for one contract/basis pair."""

    grid: np.ndarray
    premium: np.ndarray
    value: np.ndarray
    regime: Regime

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def premium_at(self, t) -> np.ndarray:
        return np.interp(t, self.grid, self.premium)

    def value_at(self, t) -> np.ndarray:
        return np.interp(t, self.grid, self.value)


def _samples(fn: PremiumLike, t: np.ndarray) -> np.ndarray:
    """Sample a constant, array, or callable on the grid ``t``."""
    if callable(fn):
        try:
            out = np.asarray(fn(t), dtype=float)
        except (TypeError, ValueError):
            out = np.asarray([float(fn(ti)) for ti in t], dtype=float)
        if out.ndim == 0:
            out = np.full_like(t, float(out))
        if out.shape != t.shape:
            raise ValidationError("premium function returned a mismatched shape")
        return out
    arr = np.asarray(fn, dtype=float)
    if arr.ndim == 0:
        return np.full_like(t, float(arr))
    if arr.shape != t.shape:
        raise ValidationError("premium samples do not match the grid")
    return arr


def _backward_rk4(
    a: np.ndarray,
    a_mid: np.ndarray,
    b: np.ndarray,
    b_mid: np.ndarray,
    step: float,
    terminal: float,
    grid: np.ndarray,
) -> np.ndarray:
    """Integrate ``dy/dt = a(t) y + b(t)`` backward from ``grid[-1]``.

    The RK4 update of a scalar linear ODE is itself affine in the state, so
    the per-step multiplier and offset are precomputed as vectors and the
    backward pass is a single scan.
    """
    h = -step
    a1, a0 = a[1:], a[:-1]
    b1, b0 = b[1:], b[:-1]
    alpha1 = a1
    alpha2 = a_mid * (1.0 + 0.5 * h * alpha1)
    alpha3 = a_mid * (1.0 + 0.5 * h * alpha2)
    alpha4 = a0 * (1.0 + h * alpha3)
    beta1 = b1
    beta2 = 0.5 * h * a_mid * beta1 + b_mid
    beta3 = 0.5 * h * a_mid * beta2 + b_mid
    beta4 = h * a0 * beta3 + b0
    mult = (1.0 + (h / 6.0) * (alpha1 + 2.0 * alpha2 + 2.0 * alpha3 + alpha4)).tolist()
    offset = ((h / 6.0) * (beta1 + 2.0 * beta2 + 2.0 * beta3 + beta4)).tolist()

    n = len(grid) - 1
    out = np.empty(n + 1)
    y = float(terminal)
    out[n] = y
    for i in range(n - 1, -1, -1):
        y = mult[i] * y + offset[i]
        if not math.isfinite(y):
            raise NumericalBlowupError(
                f"policy value became non-finite at duration t={grid[i]:.6f}",
                duration=float(grid[i]),
            )
        out[i] = y
    return out


def solve_policy_value(
    contract: Contract,
    basis: Basis,
    premium: PremiumLike,
    *,
    step: float = DEFAULT_STEP,
    regime: Optional[Regime] = None,
    sum_insured: Optional[PremiumLike] = None,
) -> PolicyFunctions:
    """Solve the policy-value ODE backward from the maturity boundary.

    Args:
        contract: contract whose surrender rule resolves the lapse benefit.
        basis: pricing or valuation basis.
        premium: premium rate per year; constant, grid samples, or callable.
        step: uniform grid step in years.
        regime: label stored on the result; inferred from the basis if omitted.
        sum_insured: optional override of the death benefit as a function of
            duration (the contract's constant sum insured by default).
    """
    grid = duration_grid(contract.term, step)
    mid = grid[:-1] + 0.5 * step
    x = contract.entry_age

    mu = np.asarray(mortality_hazard(basis.mortality, x + grid))
    mu_mid = np.asarray(mortality_hazard(basis.mortality, x + mid))
    nu = np.asarray(lapse_hazard(basis.lapse, grid))
    nu_mid = np.asarray(lapse_hazard(basis.lapse, mid))

    benefit = _samples(contract.sum_insured if sum_insured is None else sum_insured, grid)
    benefit_mid = _samples(contract.sum_insured if sum_insured is None else sum_insured, mid)
    prem = _samples(premium, grid)
    prem_mid = _samples(premium, mid)

    k = contract.surrender_rule.proportion
    a = basis.delta + mu + (1.0 - k) * nu
    a_mid = basis.delta + mu_mid + (1.0 - k) * nu_mid
    b = prem - mu * benefit
    b_mid = prem_mid - mu_mid * benefit_mid

    value = _backward_rk4(a, a_mid, b, b_mid, step, contract.maturity, grid)
    if regime is None:
        lapse_rate = constant_lapse_rate(basis.lapse)
        supported = lapse_rate is None or lapse_rate > 0.0
        regime = Regime.LEVEL_LAPSE_SUPPORTED if supported else Regime.LEVEL_NO_LAPSE_SUPPORT
    return PolicyFunctions(grid=grid, premium=prem, value=value, regime=regime)


def solve_level_premium(contract: Contract, basis: Basis, *, step: float = DEFAULT_STEP) -> float:
    """Constant premium rate satisfying the equivalence principle.

    The initial policy value is affine in a constant premium, so two solves
    pin it down exactly; a third solve confirms the boundary condition.
    """
    if contract.premium_form != PremiumForm.LEVEL:
        raise ValidationError("level premium solve requires a level-premium contract")
    v0 = solve_policy_value(contract, basis, 0.0, step=step).value[0]
    v1 = solve_policy_value(contract, basis, 1.0, step=step).value[0]
    exposure = v1 - v0
    if abs(exposure) < 1e-12 * max(1.0, abs(v0)):
        raise ValidationError("zero premium-paying exposure")
    premium = -v0 / exposure
    check = solve_policy_value(contract, basis, premium, step=step).value[0]
    scale = max(contract.sum_insured, contract.maturity, 1.0)
    if abs(check) > 1e-6 * scale:
        raise NumericalBlowupError(
            f"equivalence-principle residual {check:.3g} exceeds tolerance", duration=0.0
        )
    return premium


def current_cost_premium(
    contract: Contract, basis: Basis, *, step: float = DEFAULT_STEP
) -> PolicyFunctions:
    """Premium path equal to the running mortality cost, with zero reserve.

    With the premium funding the death cover exactly as it accrues, the
    policy value is identically zero, so the contract must pay no surrender
    or maturity benefit.
    """
    if contract.surrender_rule.kind != "zero":
        raise ValidationError("current-cost premiums require zero surrender values")
    if contract.maturity != 0.0:
        raise ValidationError("current-cost premiums fund death cover only; maturity must be 0")
    grid = duration_grid(contract.term, step)
    mu = np.asarray(mortality_hazard(basis.mortality, contract.entry_age + grid))
    premium = mu * contract.sum_insured
    return PolicyFunctions(
        grid=grid, premium=premium, value=np.zeros_like(grid), regime=Regime.CURRENT_COST
    )


def lidstone_equivalent_basis(basis: Basis, k: float) -> Basis:
    """Zero-lapse basis equivalent to a proportional-surrender design.

    When the surrender value is ``k`` times the policy value and the lapse
    hazard is a constant ``nu``, pricing is identical to a no-lapse basis
    with the force of interest raised by ``(1 - k) * nu``.
    """
    if not 0.0 <= k <= 1.0:
        raise ValidationError("surrender proportion k must lie in [0, 1]")
    rate = constant_lapse_rate(basis.lapse)
    if rate is None:
        raise UnsupportedModelError("interest-equivalence requires a constant lapse rate")
    return Basis(basis.delta + (1.0 - k) * rate, basis.mortality, LapseModel.zero())
