"""Pricing, surplus, and adverse-selection analysis for lapse-supported life insurance."""

__version__ = "0.1.0"

from .advsel import (
    Case,
    LapseBehavior,
    RegimePricing,
    ScenarioResult,
    SubpopulationSpec,
    age_sweep,
    attrition,
    build_regime,
    class_experience_bases,
    loss_rate,
    scenario_epv,
    sensitivity_run,
    subpopulation_pair,
)
from .contracts import Contract, PremiumForm, SurrenderRule, surrender_value
from .errors import (
    DomainError,
    GridAlignmentError,
    NumericalBlowupError,
    UnsupportedModelError,
    ValidationError,
)
from .hazards import (
    DEFAULT_STEP,
    G82M,
    MAX_AGE,
    Basis,
    LapseModel,
    MortalityModel,
    constant_lapse_rate,
    duration_grid,
    in_force_curve,
    lapse_hazard,
    mortality_hazard,
    survivorship_discount,
    survivorship_discount_curve,
)
from .moments import (
    LossMoments,
    MixtureMoments,
    SimulationMoments,
    mixture_variance,
    simulate_policy,
    unit_loss_moments,
)
from .surplus import (
    SurplusPath,
    max_profit_loss,
    surplus_rate,
    verify_premium_reduction_identity,
    verify_valuation_invariance,
)
from .thiele import (
    PolicyFunctions,
    Regime,
    current_cost_premium,
    lidstone_equivalent_basis,
    solve_level_premium,
    solve_policy_value,
)

__all__ = [
    "__version__",
    "Basis",
    "Case",
    "Contract",
    "DEFAULT_STEP",
    "DomainError",
    "G82M",
    "GridAlignmentError",
    "LapseBehavior",
    "LapseModel",
    "LossMoments",
    "MAX_AGE",
    "MixtureMoments",
    "MortalityModel",
    "NumericalBlowupError",
    "PolicyFunctions",
    "PremiumForm",
    "Regime",
    "RegimePricing",
    "ScenarioResult",
    "SimulationMoments",
    "SubpopulationSpec",
    "SurplusPath",
    "SurrenderRule",
    "UnsupportedModelError",
    "ValidationError",
    "age_sweep",
    "attrition",
    "build_regime",
    "class_experience_bases",
    "constant_lapse_rate",
    "current_cost_premium",
    "duration_grid",
    "in_force_curve",
    "lapse_hazard",
    "lidstone_equivalent_basis",
    "loss_rate",
    "max_profit_loss",
    "mixture_variance",
    "mortality_hazard",
    "scenario_epv",
    "sensitivity_run",
    "simulate_policy",
    "solve_level_premium",
    "solve_policy_value",
    "subpopulation_pair",
    "surplus_rate",
    "surrender_value",
    "survivorship_discount",
    "survivorship_discount_curve",
    "unit_loss_moments",
    "verify_premium_reduction_identity",
    "verify_valuation_invariance",
]
