"""Figures for simulation reports: power and average-length curves."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .engine import ComparisonReport  # noqa: E402

_PNG_METADATA = {"Software": "cmtsim"}


def render_report_figures(report: ComparisonReport, csv_path) -> list[Path]:
    """Render the report's curves next to its CSV.

    Writes <stem>_power.png and <stem>_length.png beside the CSV and
    returns the paths. Output bytes depend only on the report contents, so
    repeated runs with the same config and seed reproduce the files
    exactly.
    """
    csv_path = Path(csv_path)
    stem = csv_path.with_suffix("")
    grid = report.theta_grid
    panels = [
        ("power", "power (fraction classified non-master)",
         lambda oc: [r.power for r in oc.rows]),
        ("length", "average test length",
         lambda oc: [r.avg_length for r in oc.rows]),
    ]
    paths = []
    for tag, ylabel, extract in panels:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for oc in report.results:
            ax.plot(grid, extract(oc), marker="o", markersize=3.5, label=oc.rule)
        ax.axvline(report.hypotheses.theta_plus, color="0.6", linestyle=":", linewidth=1)
        ax.axvline(report.hypotheses.theta_minus, color="0.8", linestyle=":", linewidth=1)
        ax.set_xlabel("true ability")
        ax.set_ylabel(ylabel)
        ax.legend(frameon=False, fontsize=9)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out = Path(f"{stem}_{tag}.png")
        fig.savefig(out, dpi=150, metadata=_PNG_METADATA)
        plt.close(fig)
        paths.append(out)
    return paths
