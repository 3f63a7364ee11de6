"""Scalar indicators of the top-percentile structure of a field, per timestep.

Two indicators are provided. The C-indicator measures the spread of the
percentile band p_alpha..p_beta as a coefficient of variation: when the upper
percentiles of the field bunch together the indicator drops, and it rises
again as they spread apart. The P-indicator is the normalized percentile gap
(p_alpha - p_gamma) / (p_beta - p_gamma), which compresses toward 1 as the top
of the distribution collapses.

The C-indicator has two variants:

  cov     sqrt( 1/(N-1) * sum_s (p_s/mu - 1)^2 )   the plain coefficient of
          variation (sample std over mean); dimensionless and scale invariant.
  scaled  sqrt( mu/(N-1) * sum_s (p_s/mu - 1)^2 )  the variance term scaled by
          the mean before the root; carries sqrt(value) units and requires
          mu > 0. Equal to sqrt(mu) times the cov variant.

with mu = mean(p_s) over the N grid percentiles. "cov" is the default.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndicatorUndefined, ValidationError
from .fields import FieldSeries
from .quantiles import (
    PercentileGrid,
    PercentileVector,
    Sampling,
    draw_sample,
    exact_percentile_vector,
    percentile_vector_from_sample,
)

KIND_C = "C"
KIND_P = "P"
VARIANT_COV = "cov"
VARIANT_SCALED = "scaled"

# Default percentile choices for each indicator kind.
C_DEFAULTS = {"alpha": 0.92, "beta": 0.99}
P_DEFAULTS = {"alpha": 0.94, "beta": 0.98, "gamma": 0.01}


@dataclass(frozen=True)
class IndicatorConfig:
    """Which indicator to compute and on which percentile positions."""

    kind: str
    alpha: float
    beta: float
    gamma: float | None = None
    grid_step: float = 0.01
    variant: str = VARIANT_COV

    def __post_init__(self) -> None:
        if self.kind not in (KIND_C, KIND_P):
            raise ValidationError(f"kind must be '{KIND_C}' or '{KIND_P}', got {self.kind!r}")
        if self.variant not in (VARIANT_COV, VARIANT_SCALED):
            raise ValidationError(
                f"variant must be '{VARIANT_COV}' or '{VARIANT_SCALED}', got {self.variant!r}"
            )
        if not (0.0 < self.alpha < self.beta <= 1.0):
            raise ValidationError(
                f"need 0 < alpha < beta <= 1, got alpha={self.alpha}, beta={self.beta}"
            )
        if self.kind == KIND_P:
            if self.gamma is None:
                raise ValidationError("P indicator requires gamma")
            if not (0.0 < self.gamma < self.alpha):
                raise ValidationError(
                    f"need 0 < gamma < alpha, got gamma={self.gamma}, alpha={self.alpha}"
                )
        if self.grid_step <= 0:
            raise ValidationError(f"grid_step must be positive, got {self.grid_step}")
        n_intervals = round((self.beta - self.alpha) / self.grid_step)
        if n_intervals < 1 or abs((self.beta - self.alpha) - n_intervals * self.grid_step) > 1e-9:
            raise ValidationError(
                f"grid_step {self.grid_step} does not divide beta - alpha "
                f"= {self.beta - self.alpha}"
            )


def percentile_grid_for(config: IndicatorConfig) -> PercentileGrid:
    """The percentile positions the indicator needs at each timestep.

    C: the uniform band {alpha, alpha+step, ..., beta}. P: {gamma, alpha, beta}.
    """
    if config.kind == KIND_C:
        return PercentileGrid.uniform(config.alpha, config.beta, config.grid_step)
    return PercentileGrid(positions=(config.gamma, config.alpha, config.beta))


def c_indicator(pvec: PercentileVector, config: IndicatorConfig) -> float:
    """Coefficient of variation of the percentile band (see module docstring)."""
    expected = percentile_grid_for(config)
    if config.kind != KIND_C:
        raise ValidationError("c_indicator needs a C config")
    if pvec.grid.positions != expected.positions:
        raise ValidationError(
            f"percentile vector grid {pvec.grid.positions} does not match "
            f"the config grid {expected.positions}"
        )
    n = len(pvec.grid)
    if n < 2:
        raise ValidationError("C indicator needs at least 2 percentile values")
    mu = float(np.mean(pvec.values))
    if mu == 0.0:
        raise IndicatorUndefined(f"percentile mean is zero at timestep {pvec.timestep}")
    ratios_sq = np.square(pvec.values / mu - 1.0)
    if config.variant == VARIANT_COV:
        return float(math.sqrt(float(np.sum(ratios_sq)) / (n - 1)))
    if mu < 0.0:
        raise IndicatorUndefined(
            f"scaled variant needs a positive percentile mean, got {mu} "
            f"at timestep {pvec.timestep}"
        )
    return float(math.sqrt(mu * float(np.sum(ratios_sq)) / (n - 1)))


def p_indicator(p_alpha: float, p_beta: float, p_gamma: float) -> float:
    """Normalized percentile gap (p_alpha - p_gamma) / (p_beta - p_gamma).

    For monotone percentiles with gamma < alpha < beta the value lies in [0, 1];
    a collapsed denominator (constant field) leaves the indicator undefined.
    """
    if p_beta == p_gamma:
        raise IndicatorUndefined("p_beta equals p_gamma; normalized gap undefined")
    return (float(p_alpha) - float(p_gamma)) / (float(p_beta) - float(p_gamma))


@dataclass(frozen=True)
class IndicatorSeries:
    """Indicator value per timestep; value None marks a gap (indicator undefined there)."""

    points: tuple[tuple[int, float | None], ...]
    config: IndicatorConfig | None = None
    sampling: Sampling | None = None

    def __post_init__(self) -> None:
        pts = tuple((int(t), None if v is None else float(v)) for t, v in self.points)
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if b <= a:
                raise ValidationError(f"timesteps must be strictly increasing, got {a} then {b}")
        for t, v in pts:
            if v is not None and not math.isfinite(v):
                raise ValidationError(f"non-finite indicator value {v!r} at timestep {t}")
        object.__setattr__(self, "points", pts)

    def defined(self) -> list[tuple[int, float]]:
        return [(t, v) for t, v in self.points if v is not None]

    @property
    def source(self) -> str:
        return "exact" if self.sampling is None else "sampled"


def indicator_value(snapshot, config: IndicatorConfig, sampling: Sampling | None = None,
                    grid: PercentileGrid | None = None) -> float:
    """The configured indicator at one snapshot; raises IndicatorUndefined on degenerate input."""
    if grid is None:
        grid = percentile_grid_for(config)
    if sampling is None:
        pvec = exact_percentile_vector(snapshot, grid)
    else:
        sample = draw_sample(snapshot, sampling.k_per_rank, sampling.seed)
        pvec = percentile_vector_from_sample(sample, grid, snapshot.timestep, sampling)
    if config.kind == KIND_C:
        return c_indicator(pvec, config)
    p_gamma, p_alpha, p_beta = pvec.values  # grid order (gamma, alpha, beta)
    return p_indicator(p_alpha, p_beta, p_gamma)


def indicator_series(
    series: FieldSeries, config: IndicatorConfig, sampling: Sampling | None = None
) -> IndicatorSeries:
    """Evaluate the configured indicator at every timestep of a field series.

    With sampling, one sample per timestep feeds every percentile the indicator
    needs. Timesteps where the indicator is undefined are recorded as gaps,
    never as fabricated values.
    """
    grid = percentile_grid_for(config)
    points: list[tuple[int, float | None]] = []
    for snap in series.snapshots:
        try:
            value = indicator_value(snap, config, sampling, grid)
        except IndicatorUndefined:
            points.append((snap.timestep, None))
            continue
        points.append((snap.timestep, value if math.isfinite(value) else None))
    return IndicatorSeries(points=tuple(points), config=config, sampling=sampling)


def write_indicator_csv(series: IndicatorSeries, path: str | Path) -> Path:
    """Export as CSV with header timestep,value,defined (defined in {0,1})."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestep", "value", "defined"])
        for t, v in series.points:
            writer.writerow([t, "nan" if v is None else repr(v), 0 if v is None else 1])
    return path


def read_indicator_csv(path: str | Path) -> IndicatorSeries:
    """Read a series written by write_indicator_csv; config/sampling provenance is not recovered."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    points: list[tuple[int, float | None]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["timestep", "value", "defined"]:
            raise ValidationError(f"{path}: expected header timestep,value,defined")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 columns")
            try:
                t, defined = int(row[0]), int(row[2])
                value = float(row[1]) if defined else None
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            points.append((t, value))
    return IndicatorSeries(points=tuple(points))
