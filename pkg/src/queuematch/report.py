"""Figure rendering for experiment reports.

Figures are written next to the delimited output: occupancy curves on a
log scale (queue growth near saturation spans orders of magnitude) for
sweeps, and the paired-difference band for comparisons.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sim import PairedComparison, SweepPoint

_MARKERS = {"mwm": "o", "mm": "s", "heuristic": "^"}


def render_sweep_figure(points: list[SweepPoint], path: str, title: str = "") -> None:
    """Mean total occupancy vs arrival rate, one curve per policy."""
    by_policy: dict[str, list[SweepPoint]] = {}
    for pt in points:
        by_policy.setdefault(pt.policy.value, []).append(pt)

    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    for name, pts in by_policy.items():
        pts = sorted(pts, key=lambda p: p.arrival_rate)
        rates = [p.arrival_rate for p in pts]
        means = [p.mean for p in pts]
        errs = [p.ci_half_width for p in pts]
        ax.errorbar(
            rates,
            means,
            yerr=errs,
            marker=_MARKERS.get(name, "x"),
            capsize=3,
            linewidth=1.4,
            label=name,
        )
    ax.set_yscale("log")
    ax.set_xlabel("arrival rate (packets/slot per queue)")
    ax.set_ylabel("mean total occupancy (packets)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_compare_figure(
    comparisons: list[PairedComparison], path: str, title: str = ""
) -> None:
    """Paired mean difference with its confidence band, zero line for reference."""
    comparisons = sorted(comparisons, key=lambda c: c.arrival_rate)
    rates = [c.arrival_rate for c in comparisons]
    diffs = [c.mean_diff for c in comparisons]
    errs = [c.ci_half_width for c in comparisons]

    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax.errorbar(rates, diffs, yerr=errs, marker="o", capsize=3, linewidth=1.4)
    ax.axhline(0.0, linestyle="--", linewidth=1.0, color="gray")
    label = (
        f"{comparisons[0].policy_a.value} - {comparisons[0].policy_b.value}"
        if comparisons
        else "difference"
    )
    ax.set_xlabel("arrival rate (packets/slot per queue)")
    ax.set_ylabel(f"mean occupancy difference ({label})")
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
