"""Experiment harness: repeated realizations, threshold and sample-size sweeps,
and an adaptive-workflow driver.

Realizations vary the sampling seed (and optionally the field itself) so the
variability of sampled trigger times can be measured against a known window.
Sweeps collect per-realization reports into a long-form table whose summary
stats are always recomputable from the raw rows. The adaptive loop walks a
series in timestep order, evaluates the indicator using only data seen so
far, and switches the simulated workflow from coarse to fine output cadence
at the first confirmed crossing.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndicatorUndefined, ValidationError
from .fields import FieldSeries
from .indicators import (
    IndicatorConfig,
    indicator_series,
    indicator_value,
    percentile_grid_for,
)
from .quantiles import Sampling, rank_sample_counts
from .seeding import derive_seed
from .synth import SynthConfig, generate_ensemble, ground_truth_for
from .triggers import (
    GroundTruthWindow,
    TriggerConfig,
    TriggerResult,
    is_crossing,
    on_fired_side,
    classify,
    detect_crossing,
)

# Axis value meaning "take the whole field as the sample" (deterministic mode).
WHOLE_FIELD = "all"

STATE_COARSE = "coarse"
STATE_FINE = "fine"

# Salt distinguishing per-realization field regeneration streams from the
# per-realization sampling streams.
_FIELD_STREAM = 1


@dataclass(frozen=True)
class RealizationReport:
    realization: int
    seed: int
    fired: bool
    fire_timestep: int | None
    classification: str | None


@dataclass(frozen=True)
class SweepRow:
    value: object  # float tau, int k_per_rank, or WHOLE_FIELD
    reports: tuple[RealizationReport, ...]
    extra: dict


@dataclass(frozen=True)
class SweepTable:
    axis: str
    rows: tuple[SweepRow, ...]

    def summary(self) -> list[dict]:
        """Per-axis-value stats, recomputed from the raw rows on every call."""
        return [{"value": row.value, **row.extra, **summarize_reports(row.reports)}
                for row in self.rows]


@dataclass(frozen=True)
class WorkflowTrace:
    states: tuple[tuple[int, str], ...]
    io_events: tuple[int, ...]
    switch_timestep: int | None


def _sampling_for(k_per_rank, seed: int) -> Sampling | None:
    if k_per_rank is None:
        return None
    if k_per_rank == WHOLE_FIELD:
        return Sampling(k_per_rank=None, seed=seed)
    return Sampling(k_per_rank=int(k_per_rank), seed=seed)


def _resolve_source(source, window):
    """Returns (series or None if fresh-field synth, synth config or None, window)."""
    if isinstance(source, SynthConfig):
        if window is None:
            window = ground_truth_for(source).window
        return None, source, window
    if isinstance(source, FieldSeries):
        return source, None, window
    raise ValidationError(f"source must be a FieldSeries or SynthConfig, got {type(source).__name__}")


def run_realizations(
    source: FieldSeries | SynthConfig,
    indicator: IndicatorConfig,
    trigger: TriggerConfig,
    k_per_rank,
    n_realizations: int,
    master_seed: int,
    *,
    fresh_field: bool = False,
    window: GroundTruthWindow | None = None,
) -> list[RealizationReport]:
    """Detect the trigger across n_realizations independent sampling seeds.

    Realization i samples with a seed derived from (master_seed, i). By default
    the field is generated once and only the sampling varies; fresh_field=True
    additionally regenerates the synthetic field per realization. k_per_rank may
    be an int, WHOLE_FIELD for the deterministic whole-field sample, or None for
    exact percentiles (no sampling at all).
    """
    if n_realizations < 1:
        raise ValidationError(f"n_realizations must be >= 1, got {n_realizations}")
    series, synth_config, window = _resolve_source(source, window)
    if fresh_field and synth_config is None:
        raise ValidationError("fresh_field requires a SynthConfig source")
    if series is None and not fresh_field:
        series, _ = generate_ensemble(synth_config)
    reports = []
    for i in range(n_realizations):
        if fresh_field:
            cfg_i = dataclasses.replace(
                synth_config, seed=derive_seed(master_seed, i, _FIELD_STREAM)
            )
            series_i, _ = generate_ensemble(cfg_i)
        else:
            series_i = series
        seed_i = derive_seed(master_seed, i)
        iseries = indicator_series(series_i, indicator, _sampling_for(k_per_rank, seed_i))
        result = detect_crossing(iseries, trigger)
        reports.append(
            RealizationReport(
                realization=i,
                seed=seed_i,
                fired=result.fired,
                fire_timestep=result.fire_timestep,
                classification=classify(result, window) if window is not None else None,
            )
        )
    return reports


def sweep_tau(
    source: FieldSeries | SynthConfig,
    indicator: IndicatorConfig,
    tau_values,
    *,
    k_per_rank=None,
    seed: int = 0,
    direction: str = "from_below",
    confirm_steps: int = 0,
    window: GroundTruthWindow | None = None,
) -> SweepTable:
    """Trigger time as a function of the threshold, on one shared indicator series."""
    if not tau_values:
        raise ValidationError("tau_values must be non-empty")
    series, synth_config, window = _resolve_source(source, window)
    if series is None:
        series, _ = generate_ensemble(synth_config)
    iseries = indicator_series(series, indicator, _sampling_for(k_per_rank, seed))
    rows = []
    for tau in sorted(float(t) for t in tau_values):
        trigger = TriggerConfig(tau=tau, direction=direction, confirm_steps=confirm_steps)
        result = detect_crossing(iseries, trigger)
        report = RealizationReport(
            realization=0,
            seed=seed,
            fired=result.fired,
            fire_timestep=result.fire_timestep,
            classification=classify(result, window) if window is not None else None,
        )
        rows.append(SweepRow(value=tau, reports=(report,), extra={}))
    return SweepTable(axis="tau", rows=tuple(rows))


def _merged_k(rank_lengths, k_per_rank) -> int:
    if k_per_rank == WHOLE_FIELD:
        return int(sum(rank_lengths))
    return int(sum(rank_sample_counts(rank_lengths, int(k_per_rank))))


def sweep_samples(
    source: FieldSeries | SynthConfig,
    indicator: IndicatorConfig,
    trigger: TriggerConfig,
    k_values,
    n_realizations: int,
    master_seed: int,
    *,
    fresh_field: bool = False,
    window: GroundTruthWindow | None = None,
) -> SweepTable:
    """Trigger-time variability as a function of samples per rank.

    Every k reuses the same per-realization seeds (paired design), so spread
    differences across k reflect the sample size, not reshuffled luck.
    """
    if not list(k_values):
        raise ValidationError("k_values must be non-empty")
    series, synth_config, window = _resolve_source(source, window)
    if fresh_field:
        if synth_config is None:
            raise ValidationError("fresh_field requires a SynthConfig source")
        run_source = synth_config
    else:
        if series is None:
            series, _ = generate_ensemble(synth_config)
        run_source = series
    if series is not None:
        rank_lengths = series.rank_lengths
    else:
        rank_lengths = (synth_config.points_per_rank,) * synth_config.n_ranks
    ints = sorted(int(k) for k in k_values if k != WHOLE_FIELD)
    ordered = list(ints) + ([WHOLE_FIELD] if WHOLE_FIELD in list(k_values) else [])
    rows = []
    for k in ordered:
        reports = run_realizations(
            run_source, indicator, trigger, k, n_realizations, master_seed,
            fresh_field=fresh_field, window=window,
        )
        extra = {"k_per_rank": k, "k_total": _merged_k(rank_lengths, k)}
        rows.append(SweepRow(value=k, reports=tuple(reports), extra=extra))
    return SweepTable(axis="k_per_rank", rows=tuple(rows))


def adaptive_loop(
    series: FieldSeries,
    indicator: IndicatorConfig,
    trigger: TriggerConfig,
    coarse_io_every: int,
    fine_io_every: int,
    sampling: Sampling | None = None,
) -> WorkflowTrace:
    """Walk the series in order, switch from coarse to fine output at the first fire.

    The decision at each step uses only snapshots seen so far. Output happens
    every coarse_io_every steps before the switch and every fine_io_every steps
    from the switch on. With confirm_steps > 0 the switch lands where the
    confirmation completes (the crossing itself is only known to be real then);
    with the default confirm_steps=0 the switch is the fire timestep itself.
    """
    if fine_io_every < 1 or coarse_io_every < fine_io_every:
        raise ValidationError(
            f"need coarse_io_every >= fine_io_every >= 1, got "
            f"{coarse_io_every} and {fine_io_every}"
        )
    grid = percentile_grid_for(indicator)
    prev_defined: float | None = None
    pending: dict | None = None
    switch_pos: int | None = None
    switch_t: int | None = None
    states: list[tuple[int, str]] = []
    io_events: list[int] = []
    for pos, snap in enumerate(series.snapshots):
        try:
            value = indicator_value(snap, indicator, sampling, grid)
            if not math.isfinite(value):
                value = None
        except IndicatorUndefined:
            value = None
        if switch_pos is None and value is not None:
            if pending is not None:
                if on_fired_side(value, trigger):
                    pending["confirms"] += 1
                else:
                    pending = None
            elif prev_defined is not None and is_crossing(prev_defined, value, trigger):
                pending = {"confirms": 0}
            if pending is not None and pending["confirms"] >= trigger.confirm_steps:
                switch_pos, switch_t = pos, snap.timestep
                pending = None
            prev_defined = value
        state = STATE_FINE if switch_pos is not None and pos >= switch_pos else STATE_COARSE
        states.append((snap.timestep, state))
        if state == STATE_FINE:
            emit = (pos - switch_pos) % fine_io_every == 0
        else:
            emit = pos % coarse_io_every == 0
        if emit:
            io_events.append(snap.timestep)
    # A crossing still awaiting confirmation when the walk ends leaves the
    # trace unswitched: there were no steps left to drive at fine cadence.
    return WorkflowTrace(states=tuple(states), io_events=tuple(io_events),
                         switch_timestep=switch_t)


def summarize_reports(reports) -> dict:
    """Detection rate and fire-time stats (min, max, median, spread, IQR) for one cell."""
    n = len(reports)
    times = [r.fire_timestep for r in reports if r.fired]
    stats: dict = {
        "n": n,
        "n_fired": len(times),
        "detection_rate": len(times) / n if n else 0.0,
        "fire_min": min(times) if times else None,
        "fire_max": max(times) if times else None,
        "fire_median": float(np.median(times)) if times else None,
        "fire_spread": (max(times) - min(times)) if times else None,
        "fire_iqr": float(np.percentile(times, 75) - np.percentile(times, 25)) if times else None,
    }
    labels = [r.classification for r in reports if r.classification is not None]
    if labels:
        stats["classifications"] = {c: labels.count(c) for c in sorted(set(labels))}
    return stats


def write_sweep_csv(table: SweepTable, path: str | Path) -> Path:
    """Long form: axis_value, realization, seed, fired, fire_timestep, classification."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis_value", "realization", "seed", "fired",
                         "fire_timestep", "classification"])
        for row in table.rows:
            for r in row.reports:
                writer.writerow([
                    row.value,
                    r.realization,
                    r.seed,
                    1 if r.fired else 0,
                    "" if r.fire_timestep is None else r.fire_timestep,
                    "" if r.classification is None else r.classification,
                ])
    return path


def write_sweep_summary(table: SweepTable, path: str | Path) -> Path:
    path = Path(path)
    payload = {"axis": table.axis, "entries": table.summary()}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def write_workflow_csv(trace: WorkflowTrace, path: str | Path) -> Path:
    path = Path(path)
    io = set(trace.io_events)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestep", "state", "io_event"])
        for t, state in trace.states:
            writer.writerow([t, state, 1 if t in io else 0])
    return path
