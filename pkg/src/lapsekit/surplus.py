"""Emerging-surplus rates, funding identities, and profit/loss bounds.

Surplus emerges as the balancing item between the valuation basis and the
experienced basis.  With policy values V on a valuation basis carrying lapse
hazard nu_val and surrender value C, experienced interest delta', mortality
mu', and lapse hazard nu' give the per-policy rate

    W(t) = (delta' - delta) V - (mu' - mu) (S - V) - (nu' - nu_val) (C - V).

The expected present value of any such stream is taken against the
survivorship discount on the experience basis, with the trapezoid rule on
the common grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .contracts import Contract, SurrenderRule
from .errors import DomainError, GridAlignmentError
from .hazards import (
    DEFAULT_STEP,
    G82M,
    Basis,
    LapseModel,
    MortalityModel,
    hazard_curves,
    survivorship_discount_curve,
)
from .thiele import PolicyFunctions, Regime, solve_level_premium, solve_policy_value


@dataclass(frozen=True)
class SurplusPath:
    """Per-policy surplus rate by duration and its EPV on the experience basis."""

    grid: np.ndarray
    rate: np.ndarray
    epv: float


def trapezoid_epv(values: np.ndarray, discount: np.ndarray, step: float) -> float:
    """EPV of a payment-rate path under a discount path, by the trapezoid rule."""
    y = values * discount
    return float(step * (y.sum() - 0.5 * (y[0] + y[-1])))


def _check_aligned(*paths: PolicyFunctions) -> None:
    first = paths[0].grid
    for p in paths[1:]:
        if len(p.grid) != len(first) or abs(p.grid[-1] - first[-1]) > 1e-9:
            raise GridAlignmentError("policy-function grids do not align")


def surplus_rate(
    contract: Contract,
    valuation: PolicyFunctions,
    valuation_basis: Basis,
    experience_basis: Basis,
    surrender: Optional[SurrenderRule] = None,
) -> SurplusPath:
    """Rate of surplus emerging per policy in force, and its EPV.

    ``surrender`` overrides the contract's rule when the cash actually paid
    on lapse differs from the design used in pricing; it is resolved against
    the valuation policy values.
    """
    if abs(valuation.grid[-1] - contract.term) > 1e-9:
        raise GridAlignmentError("valuation grid does not span the contract term")
    grid = valuation.grid
    x = contract.entry_age
    rule = contract.surrender_rule if surrender is None else surrender

    mu_val, nu_val = hazard_curves(valuation_basis, grid, x)
    mu_exp, nu_exp = hazard_curves(experience_basis, grid, x)
    value = valuation.value
    cash = rule.proportion * value

    rate = (
        (experience_basis.delta - valuation_basis.delta) * value
        - (mu_exp - mu_val) * (contract.sum_insured - value)
        - (nu_exp - nu_val) * (cash - value)
    )
    phi = survivorship_discount_curve(experience_basis, grid, x)
    return SurplusPath(grid=grid, rate=rate, epv=trapezoid_epv(rate, phi, valuation.step))


def verify_premium_reduction_identity(
    contract: Contract,
    pricing_no_lapse: PolicyFunctions,
    pricing_lapse: PolicyFunctions,
    premium_basis: Basis,
    experience_basis: Basis,
) -> float:
    """Residual of the funding identity for the premium reduction.

    The EPV (on the experience basis) of the premium reduction earned by
    anticipating lapses must equal the EPV of the policy-value difference
    released by experienced lapses plus the EPV of the net cashflow of
    lapses anticipated in the premium basis:

        int phi (P - P*) = int phi nu' (V - V*) + int phi nu (V* - C).

    Returns left-hand side minus right-hand side; zero up to quadrature
    error for exact inputs.  Setting ``experience_basis = premium_basis``
    checks the same identity under premium-basis discounting, which holds
    for any experienced lapse rate.
    """
    _check_aligned(pricing_no_lapse, pricing_lapse)
    grid = pricing_no_lapse.grid
    step = pricing_no_lapse.step
    x = contract.entry_age

    _, nu = hazard_curves(premium_basis, grid, x)
    _, nu_exp = hazard_curves(experience_basis, grid, x)
    phi = survivorship_discount_curve(experience_basis, grid, x)

    v_plain = pricing_no_lapse.value
    v_supported = pricing_lapse.value
    cash = contract.surrender_rule.proportion * v_supported

    lhs = trapezoid_epv(pricing_no_lapse.premium - pricing_lapse.premium, phi, step)
    released = trapezoid_epv(nu_exp * (v_plain - v_supported), phi, step)
    anticipated = trapezoid_epv(nu * (v_supported - cash), phi, step)
    return lhs - released - anticipated


def verify_valuation_invariance(
    contract: Contract,
    premium_basis: Basis,
    experience_lapse: LapseModel,
    *,
    step: float = DEFAULT_STEP,
) -> tuple[float, float]:
    """EPV of emerging surplus under two valuation bases; equal in theory.

    The contract charges the no-lapse-support level premium P.  Valuing at
    the premium basis without lapses gives values V and surplus rate
    ``W = -nu' (C - V)``; a net-premium valuation on the lapse-loaded basis,
    with net premium P* and values V*, gives
    ``W* = (P - P*) - (nu' - nu) (C - V*)``.  Both EPVs are taken on the
    experience basis; the caller asserts their equality.
    """
    no_lapse = premium_basis.without_lapses()
    premium_plain = solve_level_premium(contract, no_lapse, step=step)
    plain = solve_policy_value(
        contract, no_lapse, premium_plain, step=step, regime=Regime.LEVEL_NO_LAPSE_SUPPORT
    )
    premium_net = solve_level_premium(contract, premium_basis, step=step)
    net = solve_policy_value(
        contract, premium_basis, premium_net, step=step, regime=Regime.LEVEL_LAPSE_SUPPORTED
    )

    grid = plain.grid
    x = contract.entry_age
    _, nu = hazard_curves(premium_basis, grid, x)
    nu_exp = np.asarray(
        hazard_curves(Basis(premium_basis.delta, premium_basis.mortality, experience_lapse), grid, x)[1]
    )
    cash = contract.surrender_rule.proportion * net.value

    w_plain = -nu_exp * (cash - plain.value)
    w_net = (premium_plain - premium_net) - (nu_exp - nu) * (cash - net.value)

    experience = Basis(premium_basis.delta, premium_basis.mortality, experience_lapse)
    phi = survivorship_discount_curve(experience, grid, x)
    return trapezoid_epv(w_plain, phi, step), trapezoid_epv(w_net, phi, step)


def max_profit_loss(
    contract: Contract,
    basis_interest: float,
    lapse_premium_rate: float,
    surrender_k: float,
    *,
    mortality: MortalityModel = G82M,
    step: float = DEFAULT_STEP,
) -> tuple[float, float]:
    """Best-case profit and worst-case loss bounds for a lapse-assumption bet.

    Max profit: charge the no-lapse-support premium while lapses occur at
    the assumed rate, retaining the full policy value on every lapse (zero
    surrender values), as a percentage of the premiums then collected.

    Max loss: charge the lapse-supported premium while no lapses occur, so
    the full anticipated release of policy value on lapse fails to
    materialise, as a percentage of the premiums then collected.  Both
    bounds ignore the surrender cash actually designed into the contract;
    with full-value surrender (k = 1) no lapse surplus exists in either
    direction and both bounds are zero.
    """
    if lapse_premium_rate <= 0.0:
        raise DomainError("premium-basis lapse rate must be positive")
    if surrender_k == 1.0:
        return 0.0, 0.0

    no_lapse = Basis(basis_interest, mortality, LapseModel.zero())
    plain_contract = replace(contract, surrender_rule=SurrenderRule.zero())
    premium_plain = solve_level_premium(plain_contract, no_lapse, step=step)
    plain = solve_policy_value(
        plain_contract, no_lapse, premium_plain, step=step, regime=Regime.LEVEL_NO_LAPSE_SUPPORT
    )

    rule = (
        SurrenderRule.zero() if surrender_k == 0.0 else SurrenderRule.proportion_of_value(surrender_k)
    )
    supported_contract = replace(contract, surrender_rule=rule)
    lapse_basis = Basis(basis_interest, mortality, LapseModel.constant(lapse_premium_rate))
    premium_supported = solve_level_premium(supported_contract, lapse_basis, step=step)
    supported = solve_policy_value(
        supported_contract,
        lapse_basis,
        premium_supported,
        step=step,
        regime=Regime.LEVEL_LAPSE_SUPPORTED,
    )

    grid = plain.grid
    x = contract.entry_age

    with_lapses = Basis(basis_interest, mortality, LapseModel.constant(lapse_premium_rate))
    phi_lapsing = survivorship_discount_curve(with_lapses, grid, x)
    profit_rate = lapse_premium_rate * plain.value
    profit_pct = 100.0 * trapezoid_epv(profit_rate, phi_lapsing, step) / trapezoid_epv(
        plain.premium, phi_lapsing, step
    )

    phi_sticky = survivorship_discount_curve(no_lapse, grid, x)
    loss_rate = -lapse_premium_rate * supported.value
    loss_pct = 100.0 * trapezoid_epv(loss_rate, phi_sticky, step) / trapezoid_epv(
        supported.premium, phi_sticky, step
    )
    return profit_pct, loss_pct
