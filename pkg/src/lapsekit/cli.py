"""Command-line front end.

Subcommands::

    lapsekit table <id> [--out PATH]         rebuild a reference table as CSV
    lapsekit figure losses [--ages A:B] [--lapse r1,r2,...] [--out PATH]
    lapsekit scenario run <file>             run one scenario config
    lapsekit verify <dir>                    compare tables against golden CSVs

Exit codes: 0 success, 1 engine/numerical error, 2 usage or validation error.
Every CSV starts with a provenance comment recording the engine version,
grid step, and seed, so reruns are byte-comparable.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .advsel import Case, build_regime, class_experience_bases, scenario_epv
from .config import ScenarioConfig, load_scenario
from .contracts import SurrenderRule
from .errors import (
    DomainError,
    GridAlignmentError,
    NumericalBlowupError,
    UnsupportedModelError,
    ValidationError,
)
from .hazards import DEFAULT_STEP, mortality_hazard
from .moments import mixture_variance, unit_loss_moments
from .tables import build_table, figure_rows
from .thiele import solve_level_premium

GOLDEN_TABLE_IDS = (1, 3, 4, 5, 6)

_KEY_COLUMNS = {
    "sv_pct",
    "force_of_interest",
    "lapse_rate",
    "phi",
    "theta",
    "experience_lapse",
}

#: Per-table comparison tolerances for ``verify`` (kind, size).
TABLE_TOLERANCES = {
    1: {
        "premium_no_support": ("rel", 2e-3),
        "premium_with_support": ("rel", 2e-3),
        "max_profit_pct": ("abs", 0.1),
        "max_loss_pct": ("abs", 0.1),
    },
    3: {"*": ("abs", 0.05)},
    4: {"*": ("abs", 0.02)},
    5: {"*": ("abs", 0.05)},
    6: {"*": ("rel", 1e-4)},
}


def _format_value(table_id: int, column: str, value) -> str:
    if isinstance(value, str):
        return value
    if column in _KEY_COLUMNS or column in ("entry_age", "valuation_lapse"):
        return f"{value:g}"
    if "coeff" in column:
        return f"{value:.5g}"
    return f"{value:.2f}"


def _provenance(step: float, seed: int) -> str:
    return f"# lapsekit {__version__} step_h={step:.10g} seed={seed}"


def write_csv(path, columns, rows, *, table_id=0, step=DEFAULT_STEP, seed=0) -> None:
    lines = [_provenance(step, seed), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_value(table_id, c, row[c]) for c in columns))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def read_csv(path) -> tuple[list[str], list[dict]]:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [ln.rstrip("\n") for ln in handle if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    return header, rows


def _cmd_table(args) -> int:
    columns, rows = build_table(args.id, step=args.step)
    write_csv(args.out, columns, rows, table_id=args.id, step=args.step)
    return 0


def _parse_ages(spec: str) -> range:
    try:
        lo, hi = (int(part) for part in spec.split(":"))
    except ValueError:
        raise ValidationError(f"--ages expects A:B, got {spec!r}") from None
    if lo > hi:
        raise ValidationError("--ages range is empty")
    if lo < 20 or hi > 90:
        raise ValidationError("entry ages must lie within [20, 90]")
    return range(lo, hi + 1)


def _cmd_figure(args) -> int:
    ages = _parse_ages(args.ages)
    rates = tuple(float(r) for r in args.lapse.split(","))
    if any(r < 0 for r in rates):
        raise ValidationError("lapse rates must be >= 0")
    rows = figure_rows(
        ages,
        rates,
        experience_follows_valuation=not args.pin_experience,
        step=args.step,
    )
    columns = ["entry_age", "case", "lapsing_mode", "valuation_lapse", "cost_pct"]
    write_csv(args.out, columns, rows, step=args.step)
    if not args.no_png:
        from .plotting import render_losses_figure

        png = args.png or (os.path.splitext(args.out)[0] + ".png" if args.out else "figure_losses.png")
        render_losses_figure(rows, png)
        print(f"figure written to {png}", file=sys.stderr)
    return 0


def _scenario_sd_ratio(cfg: ScenarioConfig, regime) -> float:
    """Standard deviation of the mixed loss over the premium EPV."""
    contract = cfg.contract
    pricing = cfg.pricing_basis
    case = cfg.case
    x = contract.entry_age
    grid = regime.policy.grid
    cash = regime.surrender

    # Surrender design per regime: the case-1 variants pin it, the
    # lapse-supported case follows the contract rule, mortality-cost pays none.
    if case == Case.CASE1_CV:
        moment_contract = replace(contract, surrender_rule=SurrenderRule.proportion_of_value(1.0))
    elif case == Case.CASE2 and contract.surrender_rule.kind != "zero":
        moment_contract = contract
    elif case == Case.CASE3:
        moment_contract = replace(contract, surrender_rule=SurrenderRule.zero(), maturity=0.0)
    else:
        moment_contract = replace(contract, surrender_rule=SurrenderRule.zero())

    surrender_path = None
    if moment_contract.surrender_rule.kind != "zero":
        def surrender_path(t):
            return np.interp(t, grid, cash)

    if case == Case.CASE3:
        def charged(t):
            return mortality_hazard(pricing.mortality, x + np.asarray(t)) * contract.sum_insured
    else:
        charged = float(regime.level_premium)

    normal_basis, high_basis = class_experience_bases(
        pricing, cfg.specs, cfg.normal_experience_lapse
    )
    normal = unit_loss_moments(
        moment_contract, charged, normal_basis, surrender_path=surrender_path, step=cfg.step
    )
    high = unit_loss_moments(
        moment_contract, charged, high_basis, surrender_path=surrender_path, step=cfg.step
    )
    _, high_spec = cfg.specs
    pi0 = high_spec.initial_proportion
    theta = high_spec.sum_multiple
    mixture = mixture_variance(
        [
            (1.0 - pi0, contract.sum_insured, normal),
            (pi0, theta * contract.sum_insured, high),
        ]
    )
    result = scenario_epv(
        case,
        cfg.specs,
        pricing,
        contract,
        normal_experience_lapse=cfg.normal_experience_lapse,
        step=cfg.step,
        regime=regime,
    )
    return float(np.sqrt(mixture.variance)) / result.epv_premiums


def _cmd_scenario(args) -> int:
    cfg = load_scenario(args.file)
    contract = cfg.contract
    regime = build_regime(cfg.case, contract, cfg.pricing_basis, step=cfg.step)
    result = scenario_epv(
        cfg.case,
        cfg.specs,
        cfg.pricing_basis,
        contract,
        normal_experience_lapse=cfg.normal_experience_lapse,
        step=cfg.step,
        regime=regime,
    )
    plain = solve_level_premium(contract, cfg.pricing_basis.without_lapses(), step=cfg.step)
    sd_ratio = _scenario_sd_ratio(cfg, regime)

    print(f"scenario: {cfg.case.value}  entry age {contract.entry_age:g}, term {contract.term:g}y")
    print(f"premium, no lapse support   : {plain:.2f} per year")
    if regime.level_premium is not None:
        print(f"premium, as charged         : {regime.level_premium:.2f} per year")
    else:
        initial = regime.policy.premium[0]
        print(f"premium, as charged         : mortality cost (initial rate {initial:.2f} per year)")
    print(f"adverse selection cost      : {result.cost_pct:.2f}% of premium EPV")
    print(f"sd of loss / premium EPV    : {sd_ratio:.2f}")

    if cfg.output_path:
        grid = result.grid
        stride = max(1, int(round(0.25 / cfg.step)))
        idx = list(range(0, len(grid), stride))
        if idx[-1] != len(grid) - 1:
            idx.append(len(grid) - 1)
        rows = [
            {
                "t": grid[i],
                "mortality_rate": result.loss_rate_decomposition[i, 0],
                "lapse_rate": result.loss_rate_decomposition[i, 1],
                "pi": result.pi_path[i],
            }
            for i in idx
        ]
        columns = ["t", "mortality_rate", "lapse_rate", "pi"]
        lines = [_provenance(cfg.step, cfg.seed), ",".join(columns)]
        for row in rows:
            lines.append(
                f"{row['t']:.6g},{row['mortality_rate']:.6f},{row['lapse_rate']:.6f},{row['pi']:.6g}"
            )
        with open(cfg.output_path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
        print(f"decomposition written to {cfg.output_path}")
    return 0


def _compare_cell(kind: str, size: float, got: float, want: float) -> bool:
    if kind == "rel":
        return abs(got - want) <= size * max(abs(want), 1e-12)
    return abs(got - want) <= size


def _cmd_verify(args) -> int:
    failures = []
    for table_id in GOLDEN_TABLE_IDS:
        golden_path = os.path.join(args.golden_dir, f"table{table_id}.csv")
        if not os.path.exists(golden_path):
            failures.append(f"table {table_id}: golden file missing ({golden_path})")
            continue
        header, golden_rows = read_csv(golden_path)
        columns, rows = build_table(table_id, step=args.step)
        if header != columns:
            failures.append(f"table {table_id}: header mismatch")
            continue
        if len(golden_rows) != len(rows):
            failures.append(
                f"table {table_id}: {len(rows)} rows computed, {len(golden_rows)} in golden"
            )
            continue
        tolerances = TABLE_TOLERANCES[table_id]
        bad = 0
        for i, (got_row, want_row) in enumerate(zip(rows, golden_rows)):
            for column in columns:
                want_raw = want_row[column]
                got = got_row[column]
                if isinstance(got, str):
                    if got != want_raw:
                        failures.append(
                            f"table {table_id} row {i} col {column}: got {got!r} want {want_raw!r}"
                        )
                        bad += 1
                    continue
                want = float(want_raw)
                if column in _KEY_COLUMNS:
                    kind, size = "abs", 1e-9
                else:
                    kind, size = tolerances.get(column, tolerances.get("*", ("abs", 1e-9)))
                if not _compare_cell(kind, size, float(got), want):
                    failures.append(
                        f"table {table_id} row {i} col {column}: got {float(got):.6g} "
                        f"want {want:.6g} (tol {kind} {size:g})"
                    )
                    bad += 1
        if bad == 0:
            print(f"table {table_id}: ok ({len(rows)} rows)")
        else:
            print(f"table {table_id}: {bad} cell(s) outside tolerance")
    if failures:
        print("verification FAILED:")
        for failure in failures:
            print(f"  {failure}")
        return 1
    print("verification passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapsekit", description=__doc__.splitlines()[0])
    parser.add_argument("--step", type=float, default=DEFAULT_STEP, help="grid step in years")
    sub = parser.add_subparsers(dest="command", required=True)

    p_table = sub.add_parser("table", help="rebuild a reference table as CSV")
    p_table.add_argument("id", type=int, choices=GOLDEN_TABLE_IDS)
    p_table.add_argument("--out", default=None, help="output CSV path (stdout if omitted)")
    p_table.set_defaults(func=_cmd_table)

    p_figure = sub.add_parser("figure", help="figure data (and rendering)")
    fig_sub = p_figure.add_subparsers(dest="figure_kind", required=True)
    p_losses = fig_sub.add_parser("losses", help="adverse-selection cost by entry age")
    p_losses.add_argument("--ages", default="25:75", help="inclusive entry-age range A:B")
    p_losses.add_argument("--lapse", default="0.03,0.06,0.09", help="valuation lapse rates")
    p_losses.add_argument("--out", default="figure_losses.csv", help="output CSV path")
    p_losses.add_argument("--png", default=None, help="figure path (defaults next to the CSV)")
    p_losses.add_argument("--no-png", action="store_true", help="skip figure rendering")
    p_losses.add_argument(
        "--pin-experience",
        action="store_true",
        help="keep the normal class's experienced lapse rate at 0.06 for all curves",
    )
    p_losses.set_defaults(func=_cmd_figure)

    p_scenario = sub.add_parser("scenario", help="run a scenario config")
    scen_sub = p_scenario.add_subparsers(dest="scenario_kind", required=True)
    p_run = scen_sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("file")
    p_run.set_defaults(func=_cmd_scenario)

    p_verify = sub.add_parser("verify", help="compare tables against golden CSVs")
    p_verify.add_argument("golden_dir")
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DomainError, UnsupportedModelError, GridAlignmentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalBlowupError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
