"""Boolean trigger over an indicator series: first threshold crossing wins.

A from_below trigger fires at the first timestep whose previous defined value
is strictly below tau while the current value is at or above it (landing
exactly on tau counts as crossed). A series that starts at or above tau never
fires without first dipping below: only an observed upward crossing counts.
Gaps in the series are skipped, so the crossing always compares consecutive
*defined* points. With confirm_steps = m > 0, the next m defined values must
stay on the fired side; if fewer than m remain, the ones that exist must.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .indicators import IndicatorSeries

FROM_BELOW = "from_below"
FROM_ABOVE = "from_above"

IN_WINDOW = "in_window"
EARLY = "early"
LATE = "late"
NONE = "none"

# Threshold guidance for the default C indicator; sweeps in this band stay
# within or just before a well-formed detection window.
TAU_VIABLE_RANGE = (0.01, 0.05)
# Reference threshold interval for the default P indicator; crossing direction
# is deliberately a config choice, not baked in.
P_TAU_INTERVAL = (0.725, 0.885)


@dataclass(frozen=True)
class TriggerConfig:
    tau: float
    direction: str = FROM_BELOW
    confirm_steps: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(float(self.tau)):
            raise ValidationError(f"tau must be finite, got {self.tau!r}")
        if self.direction not in (FROM_BELOW, FROM_ABOVE):
            raise ValidationError(
                f"direction must be '{FROM_BELOW}' or '{FROM_ABOVE}', got {self.direction!r}"
            )
        if not isinstance(self.confirm_steps, (int,)) or self.confirm_steps < 0:
            raise ValidationError(f"confirm_steps must be >= 0, got {self.confirm_steps!r}")
        object.__setattr__(self, "tau", float(self.tau))


@dataclass(frozen=True)
class TriggerResult:
    fired: bool
    fire_timestep: int | None
    prev_value: float | None
    cross_value: float | None
    config: TriggerConfig

    def __post_init__(self) -> None:
        if self.fired != (self.fire_timestep is not None):
            raise ValidationError("fired must match the presence of fire_timestep")


@dataclass(frozen=True)
class GroundTruthWindow:
    """Inclusive range of timesteps in which the trigger should fire."""

    t_lo: int
    t_hi: int

    def __post_init__(self) -> None:
        if self.t_lo > self.t_hi:
            raise ValidationError(f"need t_lo <= t_hi, got [{self.t_lo}, {self.t_hi}]")
        object.__setattr__(self, "t_lo", int(self.t_lo))
        object.__setattr__(self, "t_hi", int(self.t_hi))


def on_fired_side(value: float, config: TriggerConfig) -> bool:
    if config.direction == FROM_BELOW:
        return value >= config.tau
    return value <= config.tau


def is_crossing(prev: float, cur: float, config: TriggerConfig) -> bool:
    if config.direction == FROM_BELOW:
        return prev < config.tau <= cur
    return prev > config.tau >= cur


def detect_crossing(series: IndicatorSeries, config: TriggerConfig) -> TriggerResult:
    """First confirmed threshold crossing of the series, or a non-fire result."""
    defined = series.defined()
    if len(defined) < 2:
        raise ValidationError(f"need at least 2 defined points, got {len(defined)}")
    values = [v for _, v in defined]
    for i in range(1, len(defined)):
        prev, cur = values[i - 1], values[i]
        if not is_crossing(prev, cur, config):
            continue
        followers = values[i + 1 : i + 1 + config.confirm_steps]
        if all(on_fired_side(v, config) for v in followers):
            t = defined[i][0]
            return TriggerResult(
                fired=True, fire_timestep=t, prev_value=prev, cross_value=cur, config=config
            )
    return TriggerResult(fired=False, fire_timestep=None, prev_value=None,
                         cross_value=None, config=config)


def classify(result: TriggerResult, window: GroundTruthWindow) -> str:
    """Place a fire relative to the acceptable window.

    in_window is good; early is still viable (the indicator led the event);
    late and none are misses.
    """
    if not result.fired:
        return NONE
    t = result.fire_timestep
    if t < window.t_lo:
        return EARLY
    if t <= window.t_hi:
        return IN_WINDOW
    return LATE


def trigger_report(result: TriggerResult, classification: str | None = None) -> dict:
    """The report payload: {fired, fire_timestep, tau, direction, confirm_steps, classification?}."""
    payload = {
        "fired": result.fired,
        "fire_timestep": result.fire_timestep,
        "tau": result.config.tau,
        "direction": result.config.direction,
        "confirm_steps": result.config.confirm_steps,
    }
    if classification is not None:
        payload["classification"] = classification
    return payload


def write_trigger_report(result: TriggerResult, path: str | Path,
                         classification: str | None = None) -> Path:
    path = Path(path)
    path.write_text(json.dumps(trigger_report(result, classification), indent=2, sort_keys=True) + "\n")
    return path
