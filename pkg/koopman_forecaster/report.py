"""
ABOUTME: Plot-ready CSV/JSON writers for forecast reports
ABOUTME: Rich console summaries of flagged intervals, spectra and errors
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .forecast import FlaggedInterval, ForecastReport, HankelStep, SpectrumEntry

FLOAT_FORMAT = "%.17g"


def _labels(labels, d: int) -> list[str]:
    return list(labels) if labels else [f"x{i}" for i in range(d)]


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep=""
    )
    logging.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def predictions_frame(
    report: ForecastReport, d: int, labels=None, clamp_nonnegative: bool = False
) -> pd.DataFrame:
    """
    One row per predicted index: index, lead, source, then one column per observable.

    Absent predictions have empty value cells. ``clamp_nonnegative`` zeroes
    negative values in the output only.
    """
    names = _labels(labels, d)
    rows = []
    for index, prediction in sorted(report.predictions.items()):
        if prediction.values is None:
            values = [np.nan] * d
        else:
            values = np.array(prediction.values, dtype=float)
            if clamp_nonnegative:
                values = np.maximum(values, 0.0)
            values = list(values)
        rows.append([index, prediction.lead, prediction.source, *values])
    return pd.DataFrame(rows, columns=["index", "lead", "source", *names])


def errors_frame(report: ForecastReport, d: int, labels=None) -> pd.DataFrame:
    names = [f"error_{name}" for name in _labels(labels, d)]
    rows = []
    for index, error in sorted(report.errors.items()):
        lead = report.predictions[index].lead
        rows.append([index, lead, error, *report.component_errors[index]])
    return pd.DataFrame(rows, columns=["index", "lead", "relative_error", *names])


def spectrum_frame(entries: list[SpectrumEntry]) -> pd.DataFrame:
    """All Ritz pairs of all windows, accepted or not."""
    rows = []
    for entry in entries:
        amplitudes = entry.amplitudes
        for j, lam in enumerate(entry.eigenvalues):
            rows.append(
                [
                    entry.sweep,
                    entry.window_start,
                    lam.real,
                    lam.imag,
                    entry.residuals[j],
                    np.nan if amplitudes is None else amplitudes[j],
                    bool(entry.accepted[j]),
                ]
            )
    return pd.DataFrame(
        rows,
        columns=["sweep", "window_start", "re", "im", "residual", "amplitude", "accepted"],
    )


def write_predictions(report, path: Path, d: int, labels=None, clamp_nonnegative=False) -> Path:
    return _write_frame(predictions_frame(report, d, labels, clamp_nonnegative), path)


def write_errors(report: ForecastReport, path: Path, d: int, labels=None) -> Path:
    return _write_frame(errors_frame(report, d, labels), path)


def write_spectrum(entries: list[SpectrumEntry], path: Path) -> Path:
    return _write_frame(spectrum_frame(entries), path)


def write_hankel_log(steps: list[HankelStep], path: Path) -> Path:
    """Local Hankel sizes per step with reset flags and the triggering error."""
    frame = pd.DataFrame(
        [[s.p, s.n_h, s.m_h, s.reset, s.error] for s in steps],
        columns=["p", "n_h", "m_h", "reset", "error"],
    )
    return _write_frame(frame, path)


def write_flags(intervals: list[FlaggedInterval], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump([interval.to_dict() for interval in intervals], f, indent=2)
        f.write("\n")
    return path


def summary_dict(report: ForecastReport) -> dict:
    """Machine-readable run summary for ``--json`` output."""
    errors = np.array(list(report.errors.values()), dtype=float)
    finite = errors[np.isfinite(errors)]
    radii = [e.radius for e in report.spectrum_log if e.radius is not None]
    return {
        "predictions": len(report.predictions),
        "absent_predictions": sum(
            1 for p in report.predictions.values() if p.values is None
        ),
        "sweeps": report.sweeps,
        "flagged_intervals": [i.to_dict() for i in report.flagged_intervals],
        "windows": len(report.spectrum_log),
        "empty_spectrum_windows": sum(1 for e in report.spectrum_log if e.radius is None),
        "spectral_radius": {
            "min": min(radii) if radii else None,
            "max": max(radii) if radii else None,
        },
        "relative_error": {
            "count": int(errors.size),
            "mean": float(finite.mean()) if finite.size else None,
            "std": float(finite.std()) if finite.size else None,
            "max": float(finite.max()) if finite.size else None,
        },
        "hankel_resets": sum(1 for step in report.hankel_log if step.reset),
    }


def render_summary(console: Console, report: ForecastReport, title: str) -> None:
    """Print flagged intervals and error statistics as rich tables."""
    summary = summary_dict(report)

    if report.flagged_intervals:
        flag_table = Table(
            title="🦢 Black Swan Intervals", show_header=True, header_style="bold magenta"
        )
        flag_table.add_column("Sweep", justify="right")
        flag_table.add_column("Begin", justify="right", style="cyan")
        flag_table.add_column("End", justify="right", style="cyan")
        flag_table.add_column("Closed")
        for interval in report.flagged_intervals:
            flag_table.add_row(
                str(interval.sweep),
                str(interval.t_begin),
                str(interval.t_end),
                "yes" if interval.closed else "[red]no[/red]",
            )
        console.print(flag_table)
    elif report.spectrum_log:
        console.print(Panel("✅ No Black Swan intervals detected", style="green"))

    stats = Table(title=title, show_header=True, header_style="bold magenta")
    stats.add_column("Metric", style="cyan")
    stats.add_column("Value", justify="right")
    stats.add_row("Predictions", str(summary["predictions"]))
    stats.add_row("Absent predictions", str(summary["absent_predictions"]))
    stats.add_row("Sweeps", str(summary["sweeps"]))
    if summary["windows"]:
        stats.add_row("Windows", str(summary["windows"]))
        stats.add_row("Windows without accepted modes", str(summary["empty_spectrum_windows"]))
        radius = summary["spectral_radius"]
        if radius["min"] is not None:
            stats.add_row("Spectral radius range", f"{radius['min']:.4f} - {radius['max']:.4f}")
    if summary["hankel_resets"]:
        stats.add_row("Hankel resets", str(summary["hankel_resets"]))
    error = summary["relative_error"]
    if error["mean"] is not None:
        stats.add_row("Mean relative error", f"{error['mean']:.3e}")
        stats.add_row("Std relative error", f"{error['std']:.3e}")
        stats.add_row("Max relative error", f"{error['max']:.3e}")
    console.print(stats)
