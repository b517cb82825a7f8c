"""Metrics reports as CSV and as a printable table."""

import csv
from pathlib import Path

from .data_models import MetricsReport

CSV_HEADER = ["metric", "k", "value", "steps", "sessions"]


def write_metrics_csv(report: MetricsReport, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for metric, k, value in report.rows():
            writer.writerow([metric, k, f"{value:.6f}", report.steps, report.sessions])


def format_metrics_table(reports: dict[str, MetricsReport]) -> str:
    """One column per scorer, one row per (metric, k)."""
    names = list(reports)
    width = max(10, *(len(n) for n in names))
    lines = [f"{'metric':<12}" + "".join(f"{n:>{width + 2}}" for n in names)]
    first = reports[names[0]]
    for metric, k, _ in first.rows():
        cells = []
        for name in names:
            values = {(m, kk): v for m, kk, v in reports[name].rows()}
            cells.append(f"{values.get((metric, k), float('nan')):>{width + 2}.4f}")
        lines.append(f"{metric + '@' + str(k):<12}" + "".join(cells))
    lines.append(f"{'steps':<12}" + "".join(f"{reports[n].steps:>{width + 2}}" for n in names))
    return "\n".join(lines)
