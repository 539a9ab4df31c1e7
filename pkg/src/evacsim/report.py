"""Render batch results: summary table plus figures.

Reads the delimited report produced by ``run``/``batch`` and writes three
PNG figures (survivor percentage with min/max whiskers, exchange counts,
timing) next to a per-cell summary file.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .analytics import SUMMARY_HEADER, ReportRow, SummaryRow, summarize_rows

_STYLE = {
    "dsp": {"color": "tab:red", "marker": "s"},
    "cpnst": {"color": "tab:blue", "marker": "o"},
    "cpnst-td": {"color": "tab:green", "marker": "^"},
}


def _by_algorithm(summary: Sequence[SummaryRow]) -> dict[str, list[SummaryRow]]:
    grouped: dict[str, list[SummaryRow]] = {}
    for row in summary:
        grouped.setdefault(row.algorithm, []).append(row)
    for rows in grouped.values():
        rows.sort(key=lambda r: r.occupancy)
    return grouped


def _errorbar(ax, xs, means, lows, highs, label, style) -> None:
    yerr = [
        [m - lo for m, lo in zip(means, lows)],
        [hi - m for m, hi in zip(means, highs)],
    ]
    ax.errorbar(xs, means, yerr=yerr, label=label, capsize=3, **style)


def render_report(rows: Sequence[ReportRow], out_dir: Path) -> list[Path]:
    """Write summary and figures for a batch; returns the files written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summarize_rows(rows)
    written: list[Path] = []

    summary_path = out_dir / "summary.csv"
    with summary_path.open("w", encoding="utf-8") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for row in summary:
            fh.write(row.to_csv() + "\n")
    written.append(summary_path)

    grouped = _by_algorithm(summary)

    fig, ax = plt.subplots(figsize=(6, 4))
    for algorithm, cells in sorted(grouped.items()):
        _errorbar(
            ax,
            [c.occupancy for c in cells],
            [c.survivor_pct_mean for c in cells],
            [c.survivor_pct_min for c in cells],
            [c.survivor_pct_max for c in cells],
            algorithm,
            _STYLE.get(algorithm, {}),
        )
    ax.set_xlabel("evacuees")
    ax.set_ylabel("survivors (%)")
    ax.set_ylim(0, 105)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out_dir / "survivors.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    for algorithm, cells in sorted(grouped.items()):
        _errorbar(
            ax,
            [c.occupancy for c in cells],
            [c.exchanges_mean for c in cells],
            [c.exchanges_min for c in cells],
            [c.exchanges_max for c in cells],
            algorithm,
            _STYLE.get(algorithm, {}),
        )
    ax.set_xlabel("evacuees")
    ax.set_ylabel("two-way information exchanges")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out_dir / "exchanges.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    for algorithm, cells in sorted(grouped.items()):
        style = _STYLE.get(algorithm, {})
        ax.plot(
            [c.occupancy for c in cells],
            [c.duration_s_mean for c in cells],
            label=f"{algorithm} evacuation",
            **style,
        )
        if any(c.planning_elapsed_s_mean > 0 for c in cells):
            ax.plot(
                [c.occupancy for c in cells],
                [c.planning_elapsed_s_mean for c in cells],
                linestyle="--",
                label=f"{algorithm} planning",
                color=style.get("color"),
            )
    ax.set_xlabel("evacuees")
    ax.set_ylabel("seconds")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out_dir / "timing.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written
