"""Builders for the built-in reference tables and the loss-by-age figure.

All tables share the desk-scale baseline: a 65-year endowment sold at age
35 maturing at 100, sum insured and maturity value 250,000, G82M mortality.
The premium-comparison table sweeps interest and lapse assumptions; the
adverse-selection tables fix the force of interest at 0.05 with a 0.06
valuation lapse rate and a 0.001 starting high-risk proportion.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .advsel import (
    Case,
    LapseBehavior,
    age_sweep,
    build_regime,
    class_experience_bases,
    loss_rate,
    scenario_epv,
    subpopulation_pair,
)
from .contracts import Contract, SurrenderRule
from .errors import ValidationError
from .hazards import (
    DEFAULT_STEP,
    G82M,
    Basis,
    LapseModel,
    cumulative_trapezoid,
    hazard_curves,
    mortality_hazard,
)
from .moments import mixture_variance, unit_loss_moments
from .surplus import max_profit_loss
from .thiele import solve_level_premium

SUM_INSURED = 250_000.0
ENTRY_AGE = 35.0
END_AGE = 100.0

ADV_DELTA = 0.05
ADV_LAPSE = 0.06
HIGH_RISK_PROPORTION = 0.001

CASE_COLUMNS = [
    ("case1_C0", "uniform"),
    ("case1_C0", "differential"),
    ("case1_CV", "uniform"),
    ("case1_CV", "differential"),
    ("case2", "uniform"),
    ("case2", "differential"),
    ("case3", "uniform"),
    ("case3", "differential"),
]

TABLE_COLUMNS = {
    1: [
        "sv_pct",
        "force_of_interest",
        "lapse_rate",
        "premium_no_support",
        "premium_with_support",
        "max_profit_pct",
        "max_loss_pct",
    ],
    3: ["phi", "theta"] + [f"{c}_{m[:4]}" for c, m in CASE_COLUMNS],
    4: ["phi", "theta"] + [f"{c}_{m[:4]}" for c, m in CASE_COLUMNS],
    5: ["phi", "experience_lapse"]
    + [f"{c}_{m[:4]}" for c, m in CASE_COLUMNS if c != "case1_C0"],
    6: [
        "case",
        "surrender_value",
        "lapsing",
        "mortality_coeff",
        "lapse_coeff_baseline",
        "lapse_coeff_stressed",
    ],
}


def baseline_contract(entry_age: float = ENTRY_AGE, end_age: float = END_AGE) -> Contract:
    """Endowment at 100 with level premiums and nil surrender values."""
    return Contract(
        entry_age=entry_age,
        term=end_age - entry_age,
        sum_insured=SUM_INSURED,
        maturity=SUM_INSURED,
    )


def table1_rows(step: float = DEFAULT_STEP) -> list[dict]:
    """Premiums with/without lapse support and their profit/loss bounds."""
    contract = baseline_contract()
    rows = []
    plain_premiums: dict[float, float] = {}
    for sv in (0.5, 0.0):
        for delta in (0.03, 0.06, 0.09):
            if delta not in plain_premiums:
                plain_premiums[delta] = solve_level_premium(
                    contract, Basis(delta, G82M, LapseModel.zero()), step=step
                )
            for lapse in (0.03, 0.06):
                rule = (
                    SurrenderRule.zero() if sv == 0.0 else SurrenderRule.proportion_of_value(sv)
                )
                supported = solve_level_premium(
                    replace(contract, surrender_rule=rule),
                    Basis(delta, G82M, LapseModel.constant(lapse)),
                    step=step,
                )
                profit, loss = max_profit_loss(contract, delta, lapse, sv, step=step)
                rows.append(
                    {
                        "sv_pct": 100.0 * sv,
                        "force_of_interest": delta,
                        "lapse_rate": lapse,
                        "premium_no_support": plain_premiums[delta],
                        "premium_with_support": supported,
                        "max_profit_pct": profit,
                        "max_loss_pct": loss,
                    }
                )
    return rows


def _adv_setup(step: float):
    contract = baseline_contract()
    pricing = Basis(ADV_DELTA, G82M, LapseModel.constant(ADV_LAPSE))
    regimes = {case: build_regime(case, contract, pricing, step=step) for case in Case}
    return contract, pricing, regimes


def table3_rows(step: float = DEFAULT_STEP) -> list[dict]:
    """Adverse-selection costs as a percentage of premium income."""
    contract, pricing, regimes = _adv_setup(step)
    rows = []
    for phi in (1.0, 2.0, 5.0):
        for theta in (1.0, 4.0, 10.0):
            row = {"phi": phi, "theta": theta}
            for case_name, mode in CASE_COLUMNS:
                specs = subpopulation_pair(phi, mode, theta, HIGH_RISK_PROPORTION)
                result = scenario_epv(
                    Case(case_name),
                    specs,
                    pricing,
                    contract,
                    step=step,
                    regime=regimes[Case(case_name)],
                )
                row[f"{case_name}_{mode[:4]}"] = result.cost_pct
            rows.append(row)
    return rows


def table4_rows(step: float = DEFAULT_STEP) -> list[dict]:
    """Standard deviation of the loss as a proportion of premium income."""
    contract, pricing, regimes = _adv_setup(step)
    x = contract.entry_age

    case_contracts = {
        Case.CASE1_C0: replace(contract, surrender_rule=SurrenderRule.zero()),
        Case.CASE1_CV: replace(contract, surrender_rule=SurrenderRule.proportion_of_value(1.0)),
        Case.CASE2: replace(contract, surrender_rule=SurrenderRule.zero()),
        Case.CASE3: replace(contract, surrender_rule=SurrenderRule.zero(), maturity=0.0),
    }

    def charged(case: Case):
        regime = regimes[case]
        if case == Case.CASE3:
            return lambda t: mortality_hazard(G82M, x + np.asarray(t)) * contract.sum_insured
        return float(regime.level_premium)

    def surrender(case: Case):
        if case != Case.CASE1_CV:
            return None
        regime = regimes[Case.CASE1_CV]
        return lambda t: np.interp(t, regime.policy.grid, regime.policy.value)

    moment_cache: dict[tuple, object] = {}

    def class_moments(case: Case, basis: Basis, key: tuple):
        if key not in moment_cache:
            moment_cache[key] = unit_loss_moments(
                case_contracts[case],
                charged(case),
                basis,
                surrender_path=surrender(case),
                step=step,
            )
        return moment_cache[key]

    rows = []
    for phi in (1.0, 2.0, 5.0):
        for theta in (1.0, 4.0, 10.0):
            row = {"phi": phi, "theta": theta}
            for case_name, mode in CASE_COLUMNS:
                case = Case(case_name)
                specs = subpopulation_pair(phi, mode, theta, HIGH_RISK_PROPORTION)
                normal_basis, high_basis = class_experience_bases(pricing, specs)
                normal = class_moments(case, normal_basis, (case, "normal"))
                high = class_moments(case, high_basis, (case, phi, mode))
                mixture = mixture_variance(
                    [
                        (1.0 - HIGH_RISK_PROPORTION, contract.sum_insured, normal),
                        (HIGH_RISK_PROPORTION, theta * contract.sum_insured, high),
                    ]
                )
                grid = regimes[case].policy.grid
                premium = regimes[case].policy.premium
                disc = np.exp(-pricing.delta * grid)
                mu1, nu1 = hazard_curves(normal_basis, grid, x)
                mu2, nu2 = hazard_curves(high_basis, grid, x)
                p1 = np.exp(-cumulative_trapezoid(mu1 + nu1, step))
                p2 = np.exp(-cumulative_trapezoid(mu2 + nu2, step))

                def epv(y):
                    return float(step * (y.sum() - 0.5 * (y[0] + y[-1])))

                premium_epv = (1.0 - HIGH_RISK_PROPORTION) * epv(
                    disc * p1 * premium
                ) + HIGH_RISK_PROPORTION * theta * epv(disc * p2 * premium)
                row[f"{case_name}_{mode[:4]}"] = float(np.sqrt(mixture.variance)) / premium_epv
            rows.append(row)
    return rows


def table5_rows(step: float = DEFAULT_STEP) -> list[dict]:
    """Sensitivity of costs to the normal class's experienced lapse rate."""
    contract, pricing, regimes = _adv_setup(step)
    rows = []
    for phi in (1.0, 2.0, 5.0):
        for nu_tilde in (0.05, 0.06, 0.07):
            row = {"phi": phi, "experience_lapse": nu_tilde}
            for case_name, mode in CASE_COLUMNS:
                if case_name == "case1_C0":
                    continue
                specs = subpopulation_pair(phi, mode, 1.0, HIGH_RISK_PROPORTION)
                result = scenario_epv(
                    Case(case_name),
                    specs,
                    pricing,
                    contract,
                    normal_experience_lapse=nu_tilde,
                    step=step,
                    regime=regimes[Case(case_name)],
                )
                row[f"{case_name}_{mode[:4]}"] = result.cost_pct
            rows.append(row)
    return rows


def table6_rows(
    step: float = DEFAULT_STEP,
    *,
    pinned_pi: float = 0.001,
    phi: float = 5.0,
    theta: float = 10.0,
    baseline_lapse: float = 0.06,
    stressed_lapse: float = 0.05,
    probe_duration: float = 20.0,
) -> list[dict]:
    """Surplus-rate coefficients per in-force policy with a pinned mix.

    Each row reports the multiplier of ``mu (S - V)`` in the mortality
    component and the multiplier of ``V - C`` in the lapse component, at
    the baseline and at a stressed normal-class lapse rate.
    """
    contract, pricing, regimes = _adv_setup(step)
    surr_label = {"case1_C0": "0", "case1_CV": "V(t)", "case2": "0", "case3": "n/a"}
    rows = []
    for case_name, mode in CASE_COLUMNS:
        case = Case(case_name)
        regime = regimes[case]
        specs = subpopulation_pair(phi, mode, theta, HIGH_RISK_PROPORTION)
        t = probe_duration
        value = float(regime.policy.value_at(t))
        cash = float(np.interp(t, regime.policy.grid, regime.surrender))
        mu_probe = float(mortality_hazard(pricing.mortality, contract.entry_age + t))
        sum_at_risk = contract.sum_insured - value

        coeffs = {}
        mort_coeff = 0.0
        for label, nu_tilde in (("baseline", baseline_lapse), ("stressed", stressed_lapse)):
            mort, lapse = loss_rate(
                case,
                specs,
                pricing,
                regime,
                contract,
                t,
                pi=pinned_pi,
                normal_experience_lapse=nu_tilde,
            )
            coeffs[label] = lapse / (value - cash) if abs(value - cash) > 1e-9 else 0.0
            # stressing the lapse rate leaves the mortality component alone
            mort_coeff = mort / (mu_probe * sum_at_risk)
        rows.append(
            {
                "case": case_name,
                "surrender_value": surr_label[case_name],
                "lapsing": mode,
                "mortality_coeff": mort_coeff,
                "lapse_coeff_baseline": coeffs["baseline"],
                "lapse_coeff_stressed": coeffs["stressed"],
            }
        )
    return rows


def figure_rows(
    ages: Iterable[float] = range(25, 76),
    lapse_rates: Sequence[float] = (0.03, 0.06, 0.09),
    *,
    experience_follows_valuation: bool = True,
    step: float = DEFAULT_STEP,
    workers: Optional[int] = None,
) -> list[dict]:
    """Long-format cost rows for the loss-by-entry-age figure."""
    specs = subpopulation_pair(5.0, LapseBehavior.UNIFORM, 10.0, HIGH_RISK_PROPORTION)
    return age_sweep(
        list(Case),
        specs,
        baseline_contract(),
        ages,
        lapse_rates,
        delta=ADV_DELTA,
        mortality=G82M,
        end_age=END_AGE,
        experience_follows_valuation=experience_follows_valuation,
        pinned_experience_lapse=ADV_LAPSE,
        step=step,
        workers=workers,
    )


def build_table(table_id: int, step: float = DEFAULT_STEP) -> tuple[list[str], list[dict]]:
    """Columns and rows for one of the built-in reference tables."""
    builders = {1: table1_rows, 3: table3_rows, 4: table4_rows, 5: table5_rows, 6: table6_rows}
    if table_id not in builders:
        raise ValidationError(f"unknown table id {table_id}; choose from {sorted(builders)}")
    return TABLE_COLUMNS[table_id], builders[table_id](step)
