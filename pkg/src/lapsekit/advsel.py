"""Two-subpopulation adverse-selection scenarios.

A large `normal` class and a small `high-risk` class are both charged the
normal class's premium.  The high-risk class carries a proportional
mortality loading, buys a multiple of the normal sum insured, and lapses
uniformly (at the normal rate), differentially (not at all), or at an
explicitly stressed rate.  Surplus emerges per class against the regime's
valuation basis; costs are reported as a percentage of the premium income
actually collected from both classes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .contracts import Contract, PremiumForm, SurrenderRule
from .errors import DomainError, ValidationError
from .hazards import (
    DEFAULT_STEP,
    Basis,
    LapseModel,
    MortalityModel,
    constant_lapse_rate,
    cumulative_trapezoid,
    hazard_curves,
    survivorship_discount,
)
from .thiele import (
    PolicyFunctions,
    Regime,
    current_cost_premium,
    solve_level_premium,
    solve_policy_value,
)


class Case(str, Enum):
    """Premium/surrender regimes compared throughout the scenario tables."""

    CASE1_C0 = "case1_C0"  # level premium, no lapse support, nil surrender values
    CASE1_CV = "case1_CV"  # level premium, no lapse support, full surrender values
    CASE2 = "case2"  # level premium with lapse support
    CASE3 = "case3"  # premium equal to mortality cost


class LapseBehavior(str, Enum):
    UNIFORM = "uniform"
    DIFFERENTIAL = "differential"
    STRESSED = "stressed"


@dataclass(frozen=True)
class SubpopulationSpec:
    """One homogeneous class within the insured population."""

    class_id: str
    mortality_multiplier: float = 1.0
    lapse_behavior: LapseBehavior = LapseBehavior.UNIFORM
    lapse_rate: Optional[float] = None  # stressed behavior only
    sum_multiple: float = 1.0
    initial_proportion: float = 0.0

    def __post_init__(self) -> None:
        if self.mortality_multiplier < 1.0:
            raise ValidationError("mortality multiplier must be >= 1")
        if self.sum_multiple < 1.0:
            raise ValidationError("sum-insured multiple must be >= 1")
        if not 0.0 <= self.initial_proportion <= 1.0:
            raise ValidationError("initial proportion must lie in [0, 1]")
        if self.lapse_behavior == LapseBehavior.STRESSED:
            if self.lapse_rate is None or self.lapse_rate < 0.0:
                raise ValidationError("stressed lapse behavior needs a rate >= 0")


SpecPair = tuple[SubpopulationSpec, SubpopulationSpec]


def subpopulation_pair(
    mortality_multiplier: float,
    lapse_behavior: LapseBehavior | str,
    sum_multiple: float,
    initial_proportion: float,
    *,
    stressed_rate: Optional[float] = None,
) -> SpecPair:
    """Normal plus high-risk specs for the standard two-class setup."""
    behavior = LapseBehavior(lapse_behavior)
    normal = SubpopulationSpec(
        class_id="normal", initial_proportion=1.0 - initial_proportion
    )
    high = SubpopulationSpec(
        class_id="high_risk",
        mortality_multiplier=mortality_multiplier,
        lapse_behavior=behavior,
        lapse_rate=stressed_rate,
        sum_multiple=sum_multiple,
        initial_proportion=initial_proportion,
    )
    return normal, high


def resolved_lapse_rates(
    specs: SpecPair, valuation_rate: float, normal_experience_lapse: Optional[float] = None
) -> tuple[float, float]:
    """Experienced lapse rates (normal, high-risk) for a scenario."""
    _, high = specs
    nu1 = valuation_rate if normal_experience_lapse is None else normal_experience_lapse
    if nu1 < 0.0:
        raise ValidationError("experienced lapse rate must be >= 0")
    if high.lapse_behavior == LapseBehavior.UNIFORM:
        nu2 = nu1
    elif high.lapse_behavior == LapseBehavior.DIFFERENTIAL:
        nu2 = 0.0
    else:
        nu2 = float(high.lapse_rate)
    return nu1, nu2


def class_experience_bases(
    pricing_basis: Basis,
    specs: SpecPair,
    normal_experience_lapse: Optional[float] = None,
) -> tuple[Basis, Basis]:
    """Experience bases actually lived by the two classes."""
    valuation_rate = constant_lapse_rate(pricing_basis.lapse)
    if valuation_rate is None:
        raise ValidationError("scenario engine requires a constant valuation lapse rate")
    nu1, nu2 = resolved_lapse_rates(specs, valuation_rate, normal_experience_lapse)
    _, high = specs
    normal_basis = Basis(pricing_basis.delta, pricing_basis.mortality, LapseModel.constant(nu1))
    high_basis = Basis(
        pricing_basis.delta,
        MortalityModel.scaled(pricing_basis.mortality, high.mortality_multiplier),
        LapseModel.constant(nu2),
    )
    return normal_basis, high_basis


def attrition(
    specs: SpecPair,
    bases: tuple[Basis, Basis],
    t: float,
    *,
    entry_age: float = 0.0,
    step: float = DEFAULT_STEP,
) -> float:
    """Expected proportion of the in-force portfolio in the high-risk class.

    Each class survives in force against its own mortality and lapse
    hazards; the proportion is the high-risk share of the survivors.
    """
    if t < 0.0:
        raise DomainError("duration must be >= 0")
    normal_basis, high_basis = bases
    pi0 = specs[1].initial_proportion
    # zero-interest survivorship = pure in-force probability
    p1 = survivorship_discount(
        Basis(0.0, normal_basis.mortality, normal_basis.lapse), t, entry_age, step
    )
    p2 = survivorship_discount(
        Basis(0.0, high_basis.mortality, high_basis.lapse), t, entry_age, step
    )
    return pi0 * p2 / ((1.0 - pi0) * p1 + pi0 * p2)


@dataclass(frozen=True)
class RegimePricing:
    """Premium, value, and surrender paths for one case's pricing regime."""

    case: Case
    policy: PolicyFunctions
    surrender: np.ndarray
    valuation_lapse_rate: float
    level_premium: Optional[float]


def build_regime(
    case: Case,
    contract: Contract,
    pricing_basis: Basis,
    *,
    step: float = DEFAULT_STEP,
) -> RegimePricing:
    """Price one regime and resolve its surrender-value path.

    The case identifier governs the surrender design: case 1 variants fix
    nil or full surrender values, the lapse-supported case honors the
    contract's own rule, and the mortality-cost case carries no surrender
    or maturity benefit.
    """
    case = Case(case)
    if case in (Case.CASE1_C0, Case.CASE1_CV):
        basis = pricing_basis.without_lapses()
        pricing_contract = replace(contract, surrender_rule=SurrenderRule.zero())
        premium = solve_level_premium(pricing_contract, basis, step=step)
        policy = solve_policy_value(
            pricing_contract, basis, premium, step=step, regime=Regime.LEVEL_NO_LAPSE_SUPPORT
        )
        surrender = policy.value.copy() if case == Case.CASE1_CV else np.zeros_like(policy.value)
        return RegimePricing(case, policy, surrender, 0.0, premium)
    if case == Case.CASE2:
        valuation_rate = constant_lapse_rate(pricing_basis.lapse)
        if valuation_rate is None:
            raise ValidationError("lapse-supported pricing requires a constant lapse rate")
        premium = solve_level_premium(contract, pricing_basis, step=step)
        policy = solve_policy_value(
            contract, pricing_basis, premium, step=step, regime=Regime.LEVEL_LAPSE_SUPPORTED
        )
        surrender = contract.surrender_rule.proportion * policy.value
        return RegimePricing(case, policy, surrender, valuation_rate, premium)
    # mortality-cost premiums: zero reserve, no surrender or maturity benefit
    cc_contract = replace(
        contract,
        maturity=0.0,
        surrender_rule=SurrenderRule.zero(),
        premium_form=PremiumForm.MORTALITY_COST,
    )
    policy = current_cost_premium(cc_contract, pricing_basis, step=step)
    return RegimePricing(case, policy, np.zeros_like(policy.value), 0.0, None)


@dataclass(frozen=True)
class ScenarioResult:
    """EPVs, headline cost, and per-duration decomposition for one scenario."""

    case_id: Case
    epv_premiums: float
    epv_loss: float
    cost_pct: float
    loss_rate_decomposition: np.ndarray  # columns: mortality, lapse rate per in-force policy
    pi_path: np.ndarray
    grid: np.ndarray


def _per_class_surplus(
    contract: Contract,
    pricing_basis: Basis,
    regime: RegimePricing,
    specs: SpecPair,
    normal_experience_lapse: Optional[float],
) -> dict:
    """Shared machinery: hazards, survivorships, and per-class surplus rates."""
    grid = regime.policy.grid
    x = contract.entry_age
    step = regime.policy.step
    _, high = specs
    theta = high.sum_multiple
    pi0 = high.initial_proportion

    normal_basis, high_basis = class_experience_bases(
        pricing_basis, specs, normal_experience_lapse
    )
    mu_val, _ = hazard_curves(pricing_basis, grid, x)
    mu1, nu1_curve = hazard_curves(normal_basis, grid, x)
    mu2, nu2_curve = hazard_curves(high_basis, grid, x)
    nu_val = regime.valuation_lapse_rate

    value = regime.policy.value
    cash = regime.surrender
    sum_insured = contract.sum_insured

    w_normal = -((mu1 - mu_val) * (sum_insured - value) + (nu1_curve - nu_val) * (cash - value))
    w_high = -theta * (
        (mu2 - mu_val) * (sum_insured - value) + (nu2_curve - nu_val) * (cash - value)
    )

    p1 = np.exp(-cumulative_trapezoid(mu1 + nu1_curve, step))
    p2 = np.exp(-cumulative_trapezoid(mu2 + nu2_curve, step))
    disc = np.exp(-pricing_basis.delta * grid)
    pi_path = pi0 * p2 / ((1.0 - pi0) * p1 + pi0 * p2)

    return dict(
        grid=grid,
        step=step,
        theta=theta,
        pi0=pi0,
        mu_val=mu_val,
        mu1=mu1,
        mu2=mu2,
        nu1=nu1_curve,
        nu2=nu2_curve,
        nu_val=nu_val,
        value=value,
        cash=cash,
        sum_insured=sum_insured,
        w_normal=w_normal,
        w_high=w_high,
        p1=p1,
        p2=p2,
        disc=disc,
        pi_path=pi_path,
    )


def _trapz(y: np.ndarray, step: float) -> float:
    return float(step * (y.sum() - 0.5 * (y[0] + y[-1])))


def scenario_epv(
    case: Case,
    specs: SpecPair,
    pricing_basis: Basis,
    contract: Contract,
    *,
    normal_experience_lapse: Optional[float] = None,
    step: float = DEFAULT_STEP,
    regime: Optional[RegimePricing] = None,
) -> ScenarioResult:
    """Attrition-weighted surplus EPV and headline cost for one scenario.

    Both classes are charged the regime's normal-class premium; a high-risk
    individual pays the sum-multiple times that premium for the multiple of
    cover, so the premium EPV in the denominator includes the extra income
    brought by adverse selectors.
    """
    case = Case(case)
    if regime is None:
        regime = build_regime(case, contract, pricing_basis, step=step)
    elif regime.case != case:
        raise ValidationError(f"regime was priced for {regime.case}, not {case}")
    ctx = _per_class_surplus(contract, pricing_basis, regime, specs, normal_experience_lapse)

    step = ctx["step"]
    pi0, theta = ctx["pi0"], ctx["theta"]
    disc, p1, p2 = ctx["disc"], ctx["p1"], ctx["p2"]
    premium = regime.policy.premium

    epv_loss = (1.0 - pi0) * _trapz(disc * p1 * ctx["w_normal"], step) + pi0 * _trapz(
        disc * p2 * ctx["w_high"], step
    )
    epv_premiums = (1.0 - pi0) * _trapz(disc * p1 * premium, step) + pi0 * theta * _trapz(
        disc * p2 * premium, step
    )
    cost_pct = 100.0 * epv_loss / epv_premiums

    pi = ctx["pi_path"]
    mort = -(
        (1.0 - pi) * (ctx["mu1"] - ctx["mu_val"]) + pi * theta * (ctx["mu2"] - ctx["mu_val"])
    ) * (ctx["sum_insured"] - ctx["value"])
    lapse = -(
        (1.0 - pi) * (ctx["nu1"] - ctx["nu_val"]) + pi * theta * (ctx["nu2"] - ctx["nu_val"])
    ) * (ctx["cash"] - ctx["value"])
    decomposition = np.column_stack([mort, lapse])

    return ScenarioResult(
        case_id=case,
        epv_premiums=epv_premiums,
        epv_loss=epv_loss,
        cost_pct=cost_pct,
        loss_rate_decomposition=decomposition,
        pi_path=pi,
        grid=ctx["grid"],
    )


def loss_rate(
    case: Case,
    specs: SpecPair,
    pricing_basis: Basis,
    regime: RegimePricing,
    contract: Contract,
    t: float,
    *,
    pi: Optional[float] = None,
    normal_experience_lapse: Optional[float] = None,
) -> tuple[float, float]:
    """Mortality and lapse components of the surplus rate per in-force policy.

    ``pi`` pins the high-risk proportion (as in the decomposition tables);
    by default it follows the attrition of the two classes to duration ``t``.
    """
    case = Case(case)
    if regime.case != case:
        raise ValidationError(f"regime was priced for {regime.case}, not {case}")
    grid = regime.policy.grid
    if not grid[0] <= t <= grid[-1]:
        raise DomainError("duration lies outside the policy term")
    x = contract.entry_age
    _, high = specs
    theta = high.sum_multiple

    normal_basis, high_basis = class_experience_bases(
        pricing_basis, specs, normal_experience_lapse
    )
    if pi is None:
        pi = attrition(specs, (normal_basis, high_basis), t, entry_age=x, step=regime.policy.step)

    t_arr = np.asarray(t, dtype=float)
    mu_val, _ = hazard_curves(pricing_basis, t_arr, x)
    mu1, _ = hazard_curves(normal_basis, t_arr, x)
    mu2, _ = hazard_curves(high_basis, t_arr, x)
    nu1 = float(constant_lapse_rate(normal_basis.lapse))
    nu2 = float(constant_lapse_rate(high_basis.lapse))
    nu_val = regime.valuation_lapse_rate

    value = float(regime.policy.value_at(t))
    cash = float(np.interp(t, grid, regime.surrender))
    sum_at_risk = contract.sum_insured - value

    mortality = -float(((1.0 - pi) * (mu1 - mu_val) + pi * theta * (mu2 - mu_val)) * sum_at_risk)
    lapse = -float(((1.0 - pi) * (nu1 - nu_val) + pi * theta * (nu2 - nu_val)) * (cash - value))
    return mortality, lapse


def sensitivity_run(
    case: Case,
    specs: SpecPair,
    pricing_basis: Basis,
    contract: Contract,
    experience_lapse: float,
    *,
    step: float = DEFAULT_STEP,
    regime: Optional[RegimePricing] = None,
) -> ScenarioResult:
    """Scenario with the normal class's experienced lapse rate stressed.

    The premium and valuation basis keep their own lapse assumption; only
    the rate actually experienced by the normal class moves.  Under uniform
    lapsing the high-risk class follows the stressed rate.
    """
    if experience_lapse < 0.0:
        raise ValidationError("experienced lapse rate must be >= 0")
    return scenario_epv(
        case,
        specs,
        pricing_basis,
        contract,
        normal_experience_lapse=experience_lapse,
        step=step,
        regime=regime,
    )


def _sweep_cell(args) -> list[dict]:
    """One (entry age, valuation lapse rate) cell of the age sweep."""
    (
        entry_age,
        valuation_lapse,
        cases,
        modes,
        high_template,
        contract_template,
        delta,
        mortality,
        end_age,
        experience_follows_valuation,
        pinned_experience_lapse,
        step,
    ) = args
    contract = replace(contract_template, entry_age=entry_age, term=end_age - entry_age)
    pricing = Basis(delta, mortality, LapseModel.constant(valuation_lapse))
    experience = valuation_lapse if experience_follows_valuation else pinned_experience_lapse
    rows = []
    for case in cases:
        regime = build_regime(case, contract, pricing, step=step)
        for mode in modes:
            specs = subpopulation_pair(
                high_template.mortality_multiplier,
                mode,
                high_template.sum_multiple,
                high_template.initial_proportion,
            )
            result = scenario_epv(
                case,
                specs,
                pricing,
                contract,
                normal_experience_lapse=experience,
                step=step,
                regime=regime,
            )
            rows.append(
                {
                    "entry_age": entry_age,
                    "case": case.value,
                    "lapsing_mode": LapseBehavior(mode).value,
                    "valuation_lapse": valuation_lapse,
                    "cost_pct": result.cost_pct,
                }
            )
    return rows


def age_sweep(
    cases: Sequence[Case],
    specs: SpecPair,
    contract_template: Contract,
    entry_ages: Iterable[float],
    valuation_lapses: Iterable[float],
    *,
    delta: float,
    mortality: MortalityModel,
    end_age: float = 100.0,
    modes: Sequence[LapseBehavior] = (LapseBehavior.UNIFORM, LapseBehavior.DIFFERENTIAL),
    experience_follows_valuation: bool = True,
    pinned_experience_lapse: float = 0.06,
    step: float = DEFAULT_STEP,
    workers: Optional[int] = None,
) -> list[dict]:
    """Cost rows over entry ages and valuation lapse rates.

    The contract term adjusts so cover always ends at ``end_age``.  By
    default the normal class's experienced lapse rate follows the valuation
    rate; set ``experience_follows_valuation=False`` to pin it at
    ``pinned_experience_lapse`` instead.  Cells are independent, so the
    sweep may fan out over processes; rows come back in deterministic
    (age, lapse rate) order either way.
    """
    _, high = specs
    cases = [Case(c) for c in cases]
    tasks = [
        (
            float(age),
            float(rate),
            cases,
            tuple(modes),
            high,
            contract_template,
            delta,
            mortality,
            end_age,
            experience_follows_valuation,
            pinned_experience_lapse,
            step,
        )
        for age in entry_ages
        for rate in valuation_lapses
    ]
    if workers is None:
        workers = int(os.environ.get("LAPSEKIT_WORKERS", "1"))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_cell, tasks))
    else:
        chunks = [_sweep_cell(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]
