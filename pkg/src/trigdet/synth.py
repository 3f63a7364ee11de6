"""Synthetic ignition-like ensembles with a known acceptable trigger window.

Each point is drawn from a two-mode mixture: a stationary bulk population and
an upper mode whose spread shrinks linearly toward a configured ignition
timestep and then grows again. The top percentiles of such a field bunch
together just before "ignition" and fan out afterwards, which is exactly the
precursor the indicators are built to detect, and the construction makes the
acceptable trigger window known rather than hand-annotated.

No physical fidelity is claimed; the bulk stays stationary on purpose and a
single ignition event is enough to exercise every operation downstream.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fields import FieldSeries, FieldSnapshot
from .seeding import substream
from .triggers import GroundTruthWindow

DEFAULT_SEED = 20177


@dataclass(frozen=True)
class SynthConfig:
    n_steps: int = 200
    n_ranks: int = 16
    points_per_rank: int = 4096
    t_ignite: int = 120
    window_halfwidth: int = 15
    bulk_level: float = 0.0
    bulk_spread: float = 1.0
    top_fraction: float = 0.1
    top_level: float = 100.0
    spread_max: float = 40.0
    spread_min: float = 0.5
    post_ignite_spread_rate: float = 0.75
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        for name in ("n_steps", "n_ranks", "points_per_rank"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if not (0 <= self.t_ignite < self.n_steps):
            raise ValidationError(
                f"t_ignite must lie in [0, n_steps), got {self.t_ignite} with n_steps={self.n_steps}"
            )
        if self.window_halfwidth < 0:
            raise ValidationError(f"window_halfwidth must be >= 0, got {self.window_halfwidth}")
        if self.t_ignite - self.window_halfwidth < 0 or self.t_ignite + self.window_halfwidth >= self.n_steps:
            raise ValidationError(
                f"ground-truth window [{self.t_ignite - self.window_halfwidth}, "
                f"{self.t_ignite + self.window_halfwidth}] falls outside [0, {self.n_steps})"
            )
        if not (0.0 < self.top_fraction < 1.0):
            raise ValidationError(f"top_fraction must be in (0, 1), got {self.top_fraction}")
        if self.bulk_spread <= 0:
            raise ValidationError(f"bulk_spread must be positive, got {self.bulk_spread}")
        if self.spread_min <= 0:
            raise ValidationError(f"spread_min must be positive, got {self.spread_min}")
        if self.spread_min >= self.spread_max:
            raise ValidationError(
                f"need spread_min < spread_max, got {self.spread_min} >= {self.spread_max}"
            )
        if self.post_ignite_spread_rate < 0:
            raise ValidationError(
                f"post_ignite_spread_rate must be >= 0, got {self.post_ignite_spread_rate}"
            )
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class GroundTruth:
    """Acceptable trigger window, known by construction."""

    window: GroundTruthWindow
    config: SynthConfig


def top_spread_at(config: SynthConfig, t: int) -> float:
    """Standard deviation of the upper mode at timestep t.

    Shrinks linearly from spread_max at t=0 to spread_min at t_ignite, then
    grows by post_ignite_spread_rate per step.
    """
    if t >= config.t_ignite:
        return config.spread_min + config.post_ignite_spread_rate * (t - config.t_ignite)
    frac = t / config.t_ignite
    return max(config.spread_min, config.spread_max - (config.spread_max - config.spread_min) * frac)


def generate_snapshot(config: SynthConfig, t: int) -> FieldSnapshot:
    """One timestep of the ensemble; each rank uses its own (seed, t, rank) substream."""
    sigma = top_spread_at(config, t)
    parts = []
    for r in range(config.n_ranks):
        rng = substream(config.seed, t, r)
        n = config.points_per_rank
        in_top = rng.random(n) < config.top_fraction
        bulk = rng.normal(config.bulk_level, config.bulk_spread, n)
        top = rng.normal(config.top_level, sigma, n)
        parts.append(np.where(in_top, top, bulk))
    return FieldSnapshot(timestep=t, ranks=tuple(parts))


def ground_truth_for(config: SynthConfig) -> GroundTruth:
    window = GroundTruthWindow(
        t_lo=config.t_ignite - config.window_halfwidth,
        t_hi=config.t_ignite + config.window_halfwidth,
    )
    return GroundTruth(window=window, config=config)


def generate_ensemble(config: SynthConfig) -> tuple[FieldSeries, GroundTruth]:
    """The full series plus its ground-truth window. Deterministic per seed."""
    snapshots = tuple(generate_snapshot(config, t) for t in range(config.n_steps))
    return FieldSeries(snapshots=snapshots), ground_truth_for(config)


def synth_config_to_dict(config: SynthConfig) -> dict:
    return dataclasses.asdict(config)


def synth_config_from_dict(data: dict) -> SynthConfig:
    known = {f.name for f in dataclasses.fields(SynthConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown synth config fields: {', '.join(sorted(unknown))}")
    return SynthConfig(**data)


def load_synth_config(path: str | Path) -> SynthConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed synth config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"malformed synth config {path}: expected a JSON object")
    return synth_config_from_dict(data)


def write_ground_truth(truth: GroundTruth, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "t_lo": truth.window.t_lo,
        "t_hi": truth.window.t_hi,
        "t_ignite": truth.config.t_ignite,
        "config": synth_config_to_dict(truth.config),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def load_ground_truth_window(path: str | Path) -> GroundTruthWindow:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed ground truth file {path}: {exc}") from exc
    if not isinstance(data, dict) or "t_lo" not in data or "t_hi" not in data:
        raise ValidationError(f"ground truth file {path} must hold t_lo and t_hi")
    return GroundTruthWindow(t_lo=int(data["t_lo"]), t_hi=int(data["t_hi"]))
