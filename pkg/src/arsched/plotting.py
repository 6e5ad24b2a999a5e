"""Plot rendering for sweep results.

Plots are a convenience export; the CSVs remain the contract surface.
Each metric in sweep.csv becomes one SVG of mean vs axis value with CI
error bars, one series per policy in canonical order.  Output is kept
reproducible: text stays as text, the hash salt is pinned, and no date
metadata is embedded.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .metrics import METRIC_NAMES, SWEEP_CSV_HEADER, axis_sort_key
from .policies import POLICY_ORDER, Policy

_MARKERS = ("o", "s", "^", "v", "D", "x", "+")

_AXIS_TITLES = {
    "umed": "median size exponent",
    "arrival_factor": "arrival factor",
    "flexibility": "artime,deadline factors",
}
_METRIC_TITLES = {
    "acceptance_rate": "acceptance rate",
    "avg_slowdown": "average slowdown",
}


class PlotDataError(ValueError):
    """sweep.csv contents unusable; the message carries the row number."""


def _load_points(
    path: str | Path,
) -> dict[str, dict[str, dict[str, tuple[float, float]]]]:
    """{metric: {policy: {axis: (mean, ci95)}}}, absent means skipped."""
    data: dict[str, dict[str, dict[str, tuple[float, float]]]] = {
        m: {} for m in METRIC_NAMES
    }
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_CSV_HEADER.split(","):
            raise PlotDataError(f"row 1: expected header {SWEEP_CSV_HEADER!r}")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise PlotDataError(f"row {row_no}: expected 5 fields, got {len(row)}")
            axis, policy, metric, mean, ci95 = row
            if metric not in data:
                raise PlotDataError(f"row {row_no}: unknown metric {metric!r}")
            try:
                Policy(policy)
            except ValueError:
                raise PlotDataError(f"row {row_no}: unknown policy {policy!r}") from None
            if not mean:
                continue
            try:
                point = (float(mean), float(ci95) if ci95 else 0.0)
            except ValueError as exc:
                raise PlotDataError(f"row {row_no}: {exc}") from None
            data[metric].setdefault(policy, {})[axis] = point
    return data


def emit_plots(
    sweep_csv: str | Path, output_dir: str | Path, axis_name: str
) -> list[Path]:
    """Render one SVG per metric from sweep.csv; returns written paths.

    A metric with no plottable rows is an error and nothing is written.
    """
    data = _load_points(sweep_csv)
    for metric in METRIC_NAMES:
        if not any(series for series in data[metric].values()):
            raise PlotDataError(f"no data rows for metric {metric!r} in {sweep_csv}")

    plt.rcParams["svg.fonttype"] = "none"
    plt.rcParams["svg.hashsalt"] = "arsched"
    out_dir = Path(output_dir)
    written = []
    for metric in METRIC_NAMES:
        series_by_policy = data[metric]
        labels = sorted(
            {axis for series in series_by_policy.values() for axis in series},
            key=axis_sort_key,
        )
        positions = {label: x for x, label in enumerate(labels)}
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for policy, marker in zip(POLICY_ORDER, _MARKERS):
            series = series_by_policy.get(policy.value)
            if not series:
                continue
            xs = [positions[a] for a in labels if a in series]
            ys = [series[a][0] for a in labels if a in series]
            errs = [series[a][1] for a in labels if a in series]
            ax.errorbar(
                xs, ys, yerr=errs, marker=marker, capsize=3, label=policy.value
            )
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels)
        ax.set_xlabel(_AXIS_TITLES.get(axis_name, axis_name))
        ax.set_ylabel(_METRIC_TITLES[metric])
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{metric}_vs_{axis_name}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
