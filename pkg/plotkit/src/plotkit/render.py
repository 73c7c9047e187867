"""Render log-log MSE-vs-N figures from study CSVs.

Input files follow the documented study schema

    N,epsilon,mean,bias2,variance,mse,replications

with optional `# key=value` comment lines (the study's own fitted slope
arrives as `# slope=...`). Each input becomes one series on shared log-log
axes with a dashed reference line anchored at its first plotted point.

Alongside the figure a sidecar text file records exactly what was plotted:
the raw (N, mse) field strings after the zero-MSE filter, plus the fitted
slope per series. Golden tests compare the sidecar, never rendered pixels.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

REQUIRED_COLUMNS = ("N", "mse")


class PlotError(Exception):
    """Input is missing, malformed, or empty."""


@dataclass(frozen=True)
class StudySeries:
    label: str
    raw_rows: List[tuple]  # (N, mse) field strings, zero-MSE rows removed
    n: np.ndarray
    mse: np.ndarray
    skipped_zero: int
    reported_slope: Optional[float]

    @property
    def fitted_slope(self) -> float:
        return fit_slope(self.n, self.mse)


def fit_slope(n: np.ndarray, mse: np.ndarray) -> float:
    """Least-squares slope of log(mse) against log(N)."""
    lx = np.log(np.asarray(n, dtype=float))
    ly = np.log(np.asarray(mse, dtype=float))
    lx = lx - lx.mean()
    return float((lx * (ly - ly.mean())).sum() / (lx * lx).sum())


def read_study_csv(path: str) -> StudySeries:
    """Parse one study CSV; zero-MSE rows are skipped (they cannot be
    drawn on log axes), everything else is kept verbatim."""
    if not os.path.exists(path):
        raise PlotError(f"{path}: no such file")
    with open(path, newline="") as fh:
        lines = [ln for ln in fh]
    reported = None
    data_lines = []
    for ln in lines:
        if ln.startswith("#"):
            body = ln[1:].strip()
            if body.startswith("slope="):
                value = body.split("=", 1)[1]
                reported = None if value == "na" else float(value)
            continue
        if ln.strip():
            data_lines.append(ln)
    if not data_lines:
        raise PlotError(f"{path}: empty CSV")
    reader = csv.DictReader(data_lines)
    for col in REQUIRED_COLUMNS:
        if reader.fieldnames is None or col not in reader.fieldnames:
            raise PlotError(f"{path}: missing column {col!r}")
    raw_rows: List[tuple] = []
    skipped = 0
    for record in reader:
        if record["N"] is None or record["mse"] is None:
            raise PlotError(f"{path}: short row")
        if float(record["mse"]) <= 0.0:
            skipped += 1
            continue
        raw_rows.append((record["N"], record["mse"]))
    if not raw_rows:
        raise PlotError(f"{path}: no plottable rows (all MSE values are zero)")
    n = np.array([float(r[0]) for r in raw_rows])
    mse = np.array([float(r[1]) for r in raw_rows])
    if not np.all(np.diff(n) > 0):
        raise PlotError(f"{path}: N column must be strictly ascending")
    label = os.path.splitext(os.path.basename(path))[0]
    return StudySeries(
        label=label,
        raw_rows=raw_rows,
        n=n,
        mse=mse,
        skipped_zero=skipped,
        reported_slope=reported,
    )


def sidecar_text(series: Sequence[StudySeries], slope_ref: float) -> str:
    lines = [f"# reference_slope: {slope_ref!r}"]
    for s in series:
        lines.append(f"# series: {s.label}")
        lines.append(f"# fitted_slope: {s.fitted_slope!r}")
        if s.skipped_zero:
            lines.append(f"# skipped_zero_mse_rows: {s.skipped_zero}")
        lines.append("N,mse")
        for n_raw, mse_raw in s.raw_rows:
            lines.append(f"{n_raw},{mse_raw}")
    return "\n".join(lines) + "\n"


def render(
    csv_paths: Sequence[str],
    out_path: str,
    sidecar_path: str,
    slope_ref: float = -1.0,
) -> List[StudySeries]:
    """Read all inputs, then write the figure and its sidecar.

    All inputs are validated before anything is written, so a bad input
    leaves no partial output behind.
    """
    if not csv_paths:
        raise PlotError("no input CSVs")
    series = [read_study_csv(p) for p in csv_paths]

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for s in series:
        (line,) = ax.loglog(s.n, s.mse, marker="o", label=s.label)
        anchor = s.mse[0] * (s.n / s.n[0]) ** slope_ref
        ax.loglog(s.n, anchor, linestyle="--", color=line.get_color(), alpha=0.6)
    ax.set_xlabel("N")
    ax.set_ylabel("MSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)

    with open(sidecar_path, "w") as fh:
        fh.write(sidecar_text(series, slope_ref))
    return series
