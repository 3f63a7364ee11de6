"""Figure rendering for the CLI report path.

Each function draws one figure from harness/indicator data and writes it to a
file next to the delimited output. Rendering is deterministic (fixed backend,
no timestamps), so repeated runs with the same seed produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fields import FieldSeries
from .harness import STATE_FINE, SweepTable, WorkflowTrace
from .indicators import IndicatorSeries
from .quantiles import PercentileGrid, exact_percentile_vector
from .triggers import GroundTruthWindow

FIGSIZE = (7.0, 4.0)
DPI = 120


def _shade_window(ax, window: GroundTruthWindow | None, vertical: bool = True) -> None:
    if window is None:
        return
    if vertical:
        ax.axvspan(window.t_lo, window.t_hi, color="0.85", zorder=0)
        ax.axvline(window.t_lo, color="0.4", linestyle=":", linewidth=1)
        ax.axvline(window.t_hi, color="0.4", linestyle=":", linewidth=1)
    else:
        ax.axhspan(window.t_lo, window.t_hi, color="0.85", zorder=0)
        ax.axhline(window.t_lo, color="0.4", linestyle="--", linewidth=1)
        ax.axhline(window.t_hi, color="0.4", linestyle="--", linewidth=1)


def _finish(fig, ax, path: str | Path) -> Path:
    path = Path(path)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def save_indicator_figure(
    series: IndicatorSeries,
    path: str | Path,
    window: GroundTruthWindow | None = None,
    tau: float | None = None,
    fire_timestep: int | None = None,
) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    _shade_window(ax, window)
    defined = series.defined()
    if defined:
        ts, vs = zip(*defined)
        ax.plot(ts, vs, color="tab:blue", linewidth=1.2)
    gaps = [t for t, v in series.points if v is None]
    if gaps:
        ax.plot(gaps, [0.0] * len(gaps), linestyle="none", marker="x",
                color="tab:red", markersize=4, label="undefined")
        ax.legend(frameon=False)
    if tau is not None:
        ax.axhline(tau, color="tab:orange", linestyle="--", linewidth=1)
    if fire_timestep is not None:
        ax.axvline(fire_timestep, color="tab:red", linewidth=1.2)
    label = "indicator"
    if series.config is not None:
        label = f"{series.config.kind}-indicator ({series.source})"
    ax.set_xlabel("timestep")
    ax.set_ylabel(label)
    return _finish(fig, ax, path)


def save_percentile_bands_figure(
    series: FieldSeries, path: str | Path, window: GroundTruthWindow | None = None
) -> Path:
    """Percentile curves over time: low band blue, mid band green, top band red."""
    grid = PercentileGrid.uniform(0.01, 1.0, 0.01)
    ts = list(series.timesteps)
    curves = np.array([exact_percentile_vector(s, grid).values for s in series.snapshots])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    _shade_window(ax, window)
    for j, p in enumerate(grid.positions):
        if p <= 0.1 + 1e-9:
            color = "tab:blue"
        elif p <= 0.9 + 1e-9:
            color = "tab:green"
        else:
            color = "tab:red"
        ax.plot(ts, curves[:, j], color=color, linewidth=0.6)
    ax.set_xlabel("timestep")
    ax.set_ylabel("percentile value")
    return _finish(fig, ax, path)


def save_tau_sweep_figure(
    table: SweepTable, path: str | Path, window: GroundTruthWindow | None = None
) -> Path:
    """Fire timestep as a function of the threshold."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    _shade_window(ax, window, vertical=False)
    fired = [(row.value, row.reports[0].fire_timestep)
             for row in table.rows if row.reports[0].fired]
    missed = [row.value for row in table.rows if not row.reports[0].fired]
    if fired:
        xs, ys = zip(*fired)
        ax.step(xs, ys, where="post", color="tab:blue", marker="o", markersize=4)
    if missed:
        ax.plot(missed, [0] * len(missed), linestyle="none", marker="x",
                color="tab:red", label="no fire")
        ax.legend(frameon=False)
    ax.set_xlabel("threshold")
    ax.set_ylabel("fire timestep")
    return _finish(fig, ax, path)


def save_samples_sweep_figure(
    table: SweepTable, path: str | Path, window: GroundTruthWindow | None = None
) -> Path:
    """Fire-time range (min to max, median marked) per samples-per-rank setting."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    _shade_window(ax, window, vertical=False)
    positions = range(len(table.rows))
    labels = [str(row.value) for row in table.rows]
    for x, entry in zip(positions, table.summary()):
        if entry["n_fired"] == 0:
            continue
        ax.vlines(x, entry["fire_min"], entry["fire_max"], color="tab:blue", linewidth=3, alpha=0.6)
        ax.plot(x, entry["fire_median"], marker="o", color="tab:blue")
    ax.set_xticks(list(positions), labels)
    ax.set_xlabel("samples per rank")
    ax.set_ylabel("fire timestep")
    return _finish(fig, ax, path)


def save_adaptive_figure(trace: WorkflowTrace, path: str | Path) -> Path:
    """Workflow state over time with output events marked."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ts = [t for t, _ in trace.states]
    levels = [1 if s == STATE_FINE else 0 for _, s in trace.states]
    ax.step(ts, levels, where="post", color="tab:blue")
    io = list(trace.io_events)
    ax.plot(io, [-0.08] * len(io), linestyle="none", marker="|",
            color="tab:green", markersize=10, label="output event")
    if trace.switch_timestep is not None:
        ax.axvline(trace.switch_timestep, color="tab:red", linestyle="--", linewidth=1)
    ax.set_yticks([0, 1], ["coarse", "fine"])
    ax.set_ylim(-0.2, 1.2)
    ax.set_xlabel("timestep")
    ax.legend(frameon=False, loc="center left")
    return _finish(fig, ax, path)
