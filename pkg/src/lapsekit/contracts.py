"""Contract descriptions: benefit, surrender design, and premium form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, ValidationError
from .hazards import MAX_AGE


class PremiumForm(str, Enum):
    LEVEL = "level"
    MORTALITY_COST = "mortality_cost"


@dataclass(frozen=True)
class SurrenderRule:
    """Cash paid on lapse: nothing, or a fixed proportion of the policy value."""

    kind: str
    k: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "zero":
            pass
        elif self.kind == "proportion_of_value":
            if not (math.isfinite(self.k) and 0.0 <= self.k <= 1.0):
                raise ValidationError("surrender proportion k must lie in [0, 1]")
        else:
            raise ValidationError(f"unknown surrender rule kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "SurrenderRule":
        return cls(kind="zero")

    @classmethod
    def proportion_of_value(cls, k: float) -> "SurrenderRule":
        return cls(kind="proportion_of_value", k=k)

    @property
    def proportion(self) -> float:
        """Effective proportion of policy value paid on lapse (0 for the zero rule)."""
        return self.k if self.kind == "proportion_of_value" else 0.0


def surrender_value(rule: SurrenderRule, t: float, policy_value: float):
    """Cash payable on lapse at duration ``t`` given the current policy value.

    Accepts an array of policy values; always satisfies
    ``0 <= result <= policy_value``.
    """
    import numpy as np

    if t < 0.0:
        raise DomainError("duration must be >= 0")
    if np.any(np.asarray(policy_value) < 0.0):
        raise DomainError("policy value must be >= 0")
    return rule.proportion * policy_value


@dataclass(frozen=True)
class Contract:
    """A single-life endowment-style contract.

    ``sum_insured`` is paid immediately on death, ``maturity`` at the end of
    the term to survivors still in force, and the surrender rule determines
    the cash paid on lapse.  Premiums are payable continuously, either level
    or equal to the running mortality cost.
    """

    entry_age: float
    term: float
    sum_insured: float
    maturity: float
    surrender_rule: SurrenderRule = SurrenderRule.zero()
    premium_form: PremiumForm = PremiumForm.LEVEL

    def __post_init__(self) -> None:
        if self.term <= 0.0:
            raise ValidationError("term must be positive")
        if self.sum_insured < 0.0 or self.maturity < 0.0:
            raise ValidationError("sum insured and maturity value must be >= 0")
        if self.entry_age < 0.0 or self.entry_age + self.term > MAX_AGE:
            raise ValidationError(f"cover must fall inside ages [0, {MAX_AGE:g}]")
        if self.premium_form == PremiumForm.MORTALITY_COST and self.surrender_rule.kind != "zero":
            raise ValidationError("mortality-cost premiums require zero surrender values")

    @property
    def end_age(self) -> float:
        return self.entry_age + self.term
