"""Figure rendering over simulator result CSVs.

Sweep figures consume the harness schema (seed, policy, axis, value, metric
columns, error) and draw one mean line per policy across the axis values
with a seed-variability band. Training-curve figures consume curve CSVs
(iteration plus a metric column, optionally label and seed columns) and draw
one series per configuration label. Rendering is a pure function of the CSV:
no figure is emitted when the schema does not match or the file has no data
rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SWEEP_REQUIRED = ("seed", "policy", "axis", "value")
BANDS = ("std", "ci95")


class SchemaError(ValueError):
    """The CSV header does not carry the required columns."""


class EmptyInputError(ValueError):
    """The CSV parsed cleanly but holds no usable data rows."""


@dataclass
class FigureSpec:
    csv_path: str
    metric: str = "eta_bits_per_J"
    out_path: str = "figure.png"
    band: str = "std"

    def validate(self) -> None:
        if self.band not in BANDS:
            raise ValueError(f"band must be one of {BANDS}")


def _read_rows(path: str, required: tuple[str, ...], metric: str):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (*required, metric) if c not in header]
        if missing:
            raise SchemaError(f"missing columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise EmptyInputError(f"no data rows in {path}")
    return rows


def _band_width(samples: np.ndarray, band: str) -> float:
    if len(samples) < 2:
        return 0.0
    std = float(samples.std(ddof=0))
    if band == "std":
        return std
    return 1.96 * std / math.sqrt(len(samples))


def render_sweep_figure(spec: FigureSpec):
    """One mean line per policy over the sweep axis, with a shaded band
    across seeds (±1 std by default, 95% CI otherwise). Rows carrying an
    error marker are dropped. Returns the matplotlib figure after saving."""
    spec.validate()
    rows = _read_rows(spec.csv_path, SWEEP_REQUIRED, spec.metric)
    clean = [r for r in rows if not r.get("error")]
    if not clean:
        raise EmptyInputError(f"only error rows in {spec.csv_path}")

    axis_label = clean[0]["axis"]
    policies = sorted({r["policy"] for r in clean})
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for policy in policies:
        mine = [r for r in clean if r["policy"] == policy]
        values = sorted({float(r["value"]) for r in mine})
        means, widths = [], []
        for v in values:
            samples = np.array([float(r[spec.metric]) for r in mine
                                if float(r["value"]) == v])
            means.append(float(samples.mean()))
            widths.append(_band_width(samples, spec.band))
        means = np.array(means)
        widths = np.array(widths)
        ax.plot(values, means, marker="o", label=policy)
        ax.fill_between(values, means - widths, means + widths, alpha=0.2)
    ax.set_xlabel(_axis_unit(axis_label))
    ax.set_ylabel(_metric_unit(spec.metric))
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    return fig


def render_training_curves(csv_path: str, metric: str = "mean_reward",
                           out_path: str = "curves.png", band: str = "std",
                           window: Optional[int] = None):
    """Metric vs iteration, one series per configuration label with bands
    across seeds. Files without label/seed columns render a single series.
    ``window`` applies a trailing moving average to the rendered series only;
    the CSV is never modified."""
    if band not in BANDS:
        raise ValueError(f"band must be one of {BANDS}")
    rows = _read_rows(csv_path, ("iteration",), metric)
    has_label = "label" in rows[0]
    has_seed = "seed" in rows[0]
    labels = sorted({r["label"] for r in rows}) if has_label else [metric]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label in labels:
        mine = rows if not has_label else [r for r in rows if r["label"] == label]
        iters = sorted({int(r["iteration"]) for r in mine})
        means, widths = [], []
        for it in iters:
            at_iter = [float(r[metric]) for r in mine
                       if int(r["iteration"]) == it]
            samples = np.array(at_iter)
            means.append(float(samples.mean()))
            widths.append(_band_width(samples, band) if has_seed else 0.0)
        means = np.array(means)
        widths = np.array(widths)
        if window is not None and window > 1:
            means = _moving_average(means, window)
            widths = _moving_average(widths, window)
        ax.plot(iters, means, label=label)
        ax.fill_between(iters, means - widths, means + widths, alpha=0.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel(metric)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    return fig


def _moving_average(series: np.ndarray, window: int) -> np.ndarray:
    out = np.empty_like(series, dtype=float)
    for i in range(len(series)):
        lo = max(0, i - window + 1)
        out[i] = series[lo:i + 1].mean()
    return out


def _axis_unit(axis: str) -> str:
    return {
        "UavCount": "number of UAVs",
        "TaskSizeMbit": "task size (Mbit)",
        "BandwidthMHz": "bandwidth (MHz)",
    }.get(axis, axis)


def _metric_unit(metric: str) -> str:
    return {
        "eta_bits_per_J": "energy efficiency (bits/J)",
        "completion_ratio": "task completion ratio",
        "avg_latency_s": "average task latency (s)",
        "system_energy_J": "system energy (J)",
        "objective": "objective value",
    }.get(metric, metric)
