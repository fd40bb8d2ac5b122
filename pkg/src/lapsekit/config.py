"""Scenario configuration files.

A scenario is a single YAML document with four blocks::

    contract:
      entry_age: 35
      end_age: 100
      sum_insured: 250000
      maturity: 250000        # defaults to sum_insured
      surrender:
        kind: zero            # zero | proportion
        k: 0.5                # proportion kind only
    pricing:
      delta: 0.05
      lapse_rate: 0.06
      regime: case2           # case1_C0 | case1_CV | case2 | case3
    experience:
      lapse_normal: 0.06      # defaults to pricing.lapse_rate
      lapse_high_risk: differential   # uniform | differential | a rate
      mortality_multiplier: 5
      sum_multiple: 10
      initial_proportion: 0.001
    run:
      step_h: 0.0041666667    # defaults to 1/240
      output_path: decomposition.csv
      seed: 1

Validation failures name the offending ``block.field``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import yaml

from .advsel import Case, LapseBehavior, SpecPair, subpopulation_pair
from .contracts import Contract, SurrenderRule
from .errors import ValidationError
from .hazards import DEFAULT_STEP, G82M, Basis, LapseModel


@dataclass(frozen=True)
class ScenarioConfig:
    contract: Contract
    pricing_basis: Basis
    case: Case
    specs: SpecPair
    normal_experience_lapse: Optional[float]
    step: float
    output_path: Optional[str]
    seed: int


_MISSING = object()


def _require(block: dict, block_name: str, field: str, kind, default=_MISSING):
    if field not in block:
        if default is _MISSING:
            raise ValidationError(f"missing field {block_name}.{field}")
        return default
    value = block[field]
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"field {block_name}.{field} has invalid value {value!r}") from exc


def _block(doc: dict, name: str, required: bool = True) -> dict:
    block = doc.get(name, None)
    if block is None:
        if required:
            raise ValidationError(f"missing block {name!r}")
        return {}
    if not isinstance(block, dict):
        raise ValidationError(f"block {name!r} must be a mapping")
    return block


def parse_scenario(doc: dict) -> ScenarioConfig:
    """Build a validated scenario from a parsed YAML document."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario file must contain a mapping at the top level")

    contract_block = _block(doc, "contract")
    entry_age = _require(contract_block, "contract", "entry_age", float)
    end_age = _require(contract_block, "contract", "end_age", float)
    if end_age <= entry_age:
        raise ValidationError("contract.end_age must exceed contract.entry_age")
    sum_insured = _require(contract_block, "contract", "sum_insured", float)
    maturity = _require(contract_block, "contract", "maturity", float, default=sum_insured)

    surrender_block = _block(contract_block, "surrender", required=False)
    kind = _require(surrender_block, "contract.surrender", "kind", str, default="zero")
    if kind == "zero":
        rule = SurrenderRule.zero()
    elif kind == "proportion":
        rule = SurrenderRule.proportion_of_value(
            _require(surrender_block, "contract.surrender", "k", float)
        )
    else:
        raise ValidationError(f"contract.surrender.kind must be zero or proportion, got {kind!r}")

    try:
        contract = Contract(
            entry_age=entry_age,
            term=end_age - entry_age,
            sum_insured=sum_insured,
            maturity=maturity,
            surrender_rule=rule,
        )
    except ValidationError as exc:
        raise ValidationError(f"contract: {exc}") from exc

    pricing_block = _block(doc, "pricing")
    delta = _require(pricing_block, "pricing", "delta", float)
    lapse_rate = _require(pricing_block, "pricing", "lapse_rate", float)
    if lapse_rate < 0.0:
        raise ValidationError("pricing.lapse_rate must be >= 0")
    regime_name = _require(pricing_block, "pricing", "regime", str)
    try:
        case = Case(regime_name)
    except ValueError:
        raise ValidationError(
            f"pricing.regime must be one of {[c.value for c in Case]}, got {regime_name!r}"
        ) from None
    lapse_model = LapseModel.constant(lapse_rate) if lapse_rate > 0 else LapseModel.zero()
    pricing_basis = Basis(delta, G82M, lapse_model)

    experience_block = _block(doc, "experience")
    lapse_normal = _require(experience_block, "experience", "lapse_normal", float, default=lapse_rate)
    if lapse_normal < 0.0:
        raise ValidationError("experience.lapse_normal must be >= 0")
    high_mode = experience_block.get("lapse_high_risk", "uniform")
    stressed_rate = None
    if isinstance(high_mode, (int, float)) and not isinstance(high_mode, bool):
        stressed_rate = float(high_mode)
        behavior = LapseBehavior.STRESSED
    else:
        try:
            behavior = LapseBehavior(str(high_mode))
        except ValueError:
            raise ValidationError(
                "experience.lapse_high_risk must be uniform, differential, or a rate"
            ) from None
        if behavior == LapseBehavior.STRESSED:
            raise ValidationError("experience.lapse_high_risk: give the stressed rate as a number")
    multiplier = _require(experience_block, "experience", "mortality_multiplier", float, default=1.0)
    sum_multiple = _require(experience_block, "experience", "sum_multiple", float, default=1.0)
    proportion = _require(experience_block, "experience", "initial_proportion", float)
    try:
        normal, high = subpopulation_pair(
            multiplier, behavior, sum_multiple, proportion, stressed_rate=stressed_rate
        )
    except ValidationError as exc:
        raise ValidationError(f"experience: {exc}") from exc

    run_block = _block(doc, "run", required=False)
    step = _require(run_block, "run", "step_h", float, default=DEFAULT_STEP)
    if step <= 0.0:
        raise ValidationError("run.step_h must be positive")
    output_path = run_block.get("output_path")
    if output_path is not None:
        output_path = str(output_path)
    seed = int(_require(run_block, "run", "seed", int, default=0))

    return ScenarioConfig(
        contract=contract,
        pricing_basis=pricing_basis,
        case=case,
        specs=(normal, high),
        normal_experience_lapse=lapse_normal,
        step=step,
        output_path=output_path,
        seed=seed,
    )


def load_scenario(path: str) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Raises:
        ValidationError: naming the field (or the line, for syntax errors).
    """
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = yaml.safe_load(handle)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            where = f" at line {mark.line + 1}" if mark is not None else ""
            raise ValidationError(f"cannot parse {path}{where}: {exc.problem}") from exc
        except yaml.YAMLError as exc:
            raise ValidationError(f"cannot parse {path}: {exc}") from exc
    return parse_scenario(doc)
