"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from trigdet import FieldSeries, FieldSnapshot, IndicatorConfig, IndicatorSeries, SynthConfig


@pytest.fixture(scope="session")
def small_synth() -> SynthConfig:
    """Desk-scale ensemble that keeps unit tests fast; fires in-window for tau >= 0.02."""
    return SynthConfig(
        n_steps=60,
        n_ranks=4,
        points_per_rank=256,
        t_ignite=30,
        window_halfwidth=8,
        post_ignite_spread_rate=1.5,
        seed=777,
    )


def make_series(steps: dict[int, list[list[float]]]) -> FieldSeries:
    """Build a FieldSeries from {timestep: [rank0 values, rank1 values, ...]}."""
    snaps = [
        FieldSnapshot(timestep=t, ranks=tuple(np.array(r, dtype=float) for r in ranks))
        for t, ranks in sorted(steps.items())
    ]
    return FieldSeries(snapshots=tuple(snaps))


# A 2-point field [1-d, 1+d] has percentiles p_0.5 = 1-d and p_1.0 = 1+d, so the
# cov C-indicator on the grid {0.5, 1.0} is sqrt(2)*d. Choosing d = c/sqrt(2)
# produces any wanted indicator sequence exactly.
C_CONTROL_CONFIG = IndicatorConfig(kind="C", alpha=0.5, beta=1.0, grid_step=0.5)


def series_with_c_values(values: list[float]) -> FieldSeries:
    """Field series whose exact cov C-indicator equals the given per-step values."""
    snaps = []
    for t, c in enumerate(values):
        d = c / math.sqrt(2.0)
        snaps.append(FieldSnapshot(timestep=t, ranks=(np.array([1.0 - d, 1.0 + d]),)))
    return FieldSeries(snapshots=tuple(snaps))


def points_series(values: list[float | None], start: int = 0) -> IndicatorSeries:
    return IndicatorSeries(points=tuple((start + i, v) for i, v in enumerate(values)))


def brute_force_crossing(points, tau: float, direction: str = "from_below",
                         confirm_steps: int = 0):
    """Independent scan oracle for the first confirmed threshold crossing.

    points: iterable of (timestep, value-or-None). Returns the fire timestep or
    None. Works directly on the defined subsequence, checking every index.
    """
    defined = [(t, v) for t, v in points if v is not None]
    for i in range(1, len(defined)):
        prev, cur = defined[i - 1][1], defined[i][1]
        if direction == "from_below":
            crossed = prev < tau and cur >= tau
            side = lambda v: v >= tau  # noqa: E731
        else:
            crossed = prev > tau and cur <= tau
            side = lambda v: v <= tau  # noqa: E731
        if not crossed:
            continue
        followers = [v for _, v in defined[i + 1 : i + 1 + confirm_steps]]
        if all(side(v) for v in followers):
            return defined[i][0]
    return None
