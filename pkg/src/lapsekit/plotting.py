"""Render the loss-by-entry-age figure from sweep rows."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

CASE_TITLES = {
    "case1_C0": "Level premium, no lapse support, C = 0",
    "case1_CV": "Level premium, no lapse support, C = V",
    "case2": "Level premium, with lapse support",
    "case3": "Premium = mortality cost",
}

LAPSE_COLORS = {0.03: "tab:blue", 0.06: "tab:green", 0.09: "tab:red"}
MODE_STYLES = {"uniform": "-", "differential": "--"}


def render_losses_figure(rows: list[dict], path: str) -> None:
    """Save a 2x2 panel figure of cost against entry age.

    One panel per pricing regime; line color encodes the valuation lapse
    rate and line style the lapsing mode of the high-risk class.
    """
    by_series = defaultdict(list)
    for row in rows:
        key = (row["case"], row["lapsing_mode"], row["valuation_lapse"])
        by_series[key].append((row["entry_age"], row["cost_pct"]))

    cases = [c for c in CASE_TITLES if any(k[0] == c for k in by_series)]
    ncols = 2
    nrows = (len(cases) + 1) // 2
    fig, axes = plt.subplots(nrows, ncols, figsize=(10, 4 * nrows), squeeze=False)

    for ax, case in zip(axes.flat, cases):
        for (c, mode, rate), pts in sorted(by_series.items()):
            if c != case:
                continue
            pts = sorted(pts)
            ages = [p[0] for p in pts]
            costs = [p[1] for p in pts]
            color = LAPSE_COLORS.get(rate)
            ax.plot(
                ages,
                costs,
                MODE_STYLES.get(mode, "-"),
                color=color,
                label=f"{mode}, lapse {rate:g}",
            )
        ax.set_title(CASE_TITLES[case], fontsize=10)
        ax.set_xlabel("Age at entry")
        ax.set_ylabel("Cost as % of premium EPV")
        ax.axhline(0.0, color="gray", linewidth=0.6)
        ax.legend(fontsize=7)

    for ax in axes.flat[len(cases):]:
        ax.set_visible(False)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
