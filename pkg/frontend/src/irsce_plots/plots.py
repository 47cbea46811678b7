"""Render line figures from sweep CSV logs.

Pure file-to-file transform: rows are read from one or more CSVs sharing
a header, grouped by a series column (typically the method name), and
drawn as one line per series with the y axis optionally log scaled.  No
metrics are recomputed here; the numbers come straight from the CSV.

The expected input is the aggregate CSV written by the experiment
harness (columns ``axis_value, method, trials, failures, median_nmse,
mean_nmse, median_nmse_ok, mean_nmse_ok``), but any CSV containing the
referenced columns works, so per-trial parameter-error columns can be
plotted the same way.
"""

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


class SchemaError(ValueError):
    """The CSV does not match the columns the plot spec references."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: inputs, the column roles, and the output path."""

    inputs: tuple                    # CSV paths, concatenated row-wise
    output: str                      # image file path
    x_column: str = "axis_value"
    y_column: str = "median_nmse"
    group_column: str = "method"
    log_y: bool = True
    x_label: str = ""
    y_label: str = ""
    title: str = ""

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def read_rows(path, required):
    """Rows of one CSV as dicts, validating the required columns exist."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {missing}; header is {header}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def collect_series(spec):
    """Mapping series name -> (x, y) float lists, x-sorted, from all inputs."""
    required = (spec.x_column, spec.y_column, spec.group_column)
    series = {}
    for path in spec.inputs:
        for row in read_rows(path, required):
            try:
                x = float(row[spec.x_column])
                y = float(row[spec.y_column])
            except ValueError as exc:
                raise SchemaError(
                    f"{path}: non-numeric value in plotted columns: {exc}")
            series.setdefault(row[spec.group_column], []).append((x, y))
    for name, points in series.items():
        points.sort()
        if spec.log_y and any(y <= 0 or math.isnan(y) for _, y in points):
            raise SchemaError(
                f"series {name!r} has non-positive or NaN values; "
                "log-scale y requires positive data")
    return series


_MARKERS = ("o", "s", "^", "d", "v", "*", "x")


def plot_nmse(spec):
    """Draw the figure described by ``spec`` and write it to spec.output.

    Returns the output path.  One line per group value, legend labelled
    with the group names.
    """
    series = collect_series(spec)
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for i, (name, points) in enumerate(sorted(series.items())):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)], label=name)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label or spec.x_column)
    ax.set_ylabel(spec.y_label or spec.y_column)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return spec.output
