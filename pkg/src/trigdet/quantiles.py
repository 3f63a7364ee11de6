"""Exact percentile oracle, uniform-sampling estimator, and sample-size bound.

The percentile of a value array is defined by sorting (nondecreasing) and
taking the 1-based entry ceil(alpha * N), clamped into [1, N]. The estimator
applies the identical rule to a sorted sample of k values drawn uniformly with
replacement, so its rank error depends on k only, never on N. The number of
samples needed for a given rank accuracy comes from the
Dvoretzky-Kiefer-Wolfowitz bound on the empirical CDF:

    P( sup_x |F_k(x) - F(x)| > eps ) <= 2 exp(-2 k eps^2)

which is distribution-free, so k = ceil(ln(2/delta) / (2 eps^2)) guarantees
rank error <= eps with probability >= 1 - delta regardless of field size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fields import FieldSnapshot
from .seeding import check_seed, substream

# Products alpha*N that land within this distance of an integer are treated as
# that integer; 0.07*100 evaluates to 7.000000000000001 in binary floats and
# must still index entry 7, not 8.
_INDEX_SNAP = 1e-9


def _check_fraction(alpha: float, name: str = "alpha") -> float:
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0) or math.isnan(alpha):
        raise ValidationError(f"{name} must be in (0, 1], got {alpha!r}")
    return alpha


def ceil_rank_index(alpha: float, n: int) -> int:
    """1-based index ceil(alpha * n), snapped against float noise and clamped to [1, n]."""
    idx = math.ceil(alpha * n - _INDEX_SNAP)
    return min(max(idx, 1), n)


@dataclass(frozen=True)
class PercentileGrid:
    """Ordered percentile fractions in (0, 1]; at least two for indicator use."""

    positions: tuple[float, ...]

    def __post_init__(self) -> None:
        pos = tuple(float(p) for p in self.positions)
        if len(pos) < 2:
            raise ValidationError("grid needs at least 2 positions")
        for p in pos:
            _check_fraction(p, "grid position")
        for a, b in zip(pos, pos[1:]):
            if b <= a:
                raise ValidationError(f"grid positions must be strictly increasing, got {a} then {b}")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def uniform(cls, lo: float, hi: float, step: float = 0.01) -> "PercentileGrid":
        """Grid {lo, lo+step, ..., hi}; step must divide hi - lo (tolerance 1e-9)."""
        lo, hi = _check_fraction(lo, "lo"), _check_fraction(hi, "hi")
        if hi <= lo:
            raise ValidationError(f"need lo < hi, got lo={lo}, hi={hi}")
        if step <= 0:
            raise ValidationError(f"step must be positive, got {step}")
        n_intervals = round((hi - lo) / step)
        if n_intervals < 1 or abs((hi - lo) - n_intervals * step) > 1e-9:
            raise ValidationError(f"step {step} does not divide range [{lo}, {hi}]")
        positions = [lo + i * step for i in range(n_intervals)] + [hi]
        return cls(positions=tuple(positions))

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class Sampling:
    """How to sample a snapshot: k values per rank, or the whole field when k_per_rank is None."""

    k_per_rank: int | None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_per_rank is not None:
            if not isinstance(self.k_per_rank, (int, np.integer)) or self.k_per_rank < 1:
                raise ValidationError(f"k_per_rank must be >= 1 or None, got {self.k_per_rank!r}")
            object.__setattr__(self, "k_per_rank", int(self.k_per_rank))
        object.__setattr__(self, "seed", check_seed(self.seed))


@dataclass(frozen=True)
class Sample:
    """Sorted draw of k values from one snapshot."""

    values: np.ndarray
    k: int
    seed: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("sample must hold at least one value")
        if np.any(np.diff(arr) < 0):
            raise ValidationError("sample values must be sorted nondecreasing")
        if int(self.k) != arr.size:
            raise ValidationError(f"k={self.k} but sample holds {arr.size} values")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class PercentileVector:
    """Percentile values of one snapshot on a grid; nondecreasing by construction."""

    grid: PercentileGrid
    values: np.ndarray
    timestep: int
    sampling: Sampling | None = None  # None means exact

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (len(self.grid),):
            raise ValidationError(
                f"expected {len(self.grid)} values for the grid, got shape {arr.shape}"
            )
        if np.any(np.diff(arr) < 0):
            raise ValidationError("percentile values must be nondecreasing along the grid")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "timestep", int(self.timestep))

    @property
    def source(self) -> str:
        return "exact" if self.sampling is None else "sampled"


def exact_percentile(values, alpha: float) -> float:
    """Entry ceil(alpha*N) of the sorted array, 1-based."""
    alpha = _check_fraction(alpha)
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("cannot take a percentile of an empty array")
    ordered = np.sort(arr, kind="stable")
    return float(ordered[ceil_rank_index(alpha, arr.size) - 1])


def exact_percentile_vector(snapshot: FieldSnapshot, grid: PercentileGrid) -> PercentileVector:
    """All grid percentiles of a snapshot with a single full sort."""
    ordered = np.sort(snapshot.concat(), kind="stable")
    n = ordered.size
    idx = np.array([ceil_rank_index(p, n) - 1 for p in grid.positions])
    return PercentileVector(grid=grid, values=ordered[idx], timestep=snapshot.timestep)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def rank_sample_counts(rank_lengths, k_per_rank: int) -> tuple[int, ...]:
    """Per-rank draw counts proportional to each rank's share of the field, minimum 1.

    Equal partitions get exactly k_per_rank each; unequal partitions are weighted
    so the merged sample is uniform over the global field.
    """
    n_total = sum(rank_lengths)
    n_ranks = len(rank_lengths)
    return tuple(
        max(1, _round_half_up(k_per_rank * n_ranks * length / n_total))
        for length in rank_lengths
    )


def draw_sample(snapshot: FieldSnapshot, k_per_rank: int | None, seed: int) -> Sample:
    """Uniform-with-replacement sample of a snapshot, merged across ranks and sorted.

    Each rank draws from its own (seed, timestep, rank) substream, so the result
    does not depend on rank iteration order. k_per_rank=None returns the whole
    field as a deterministic sample (the estimator then reproduces the exact
    percentiles).
    """
    check_seed(seed)
    if k_per_rank is None:
        values = np.sort(snapshot.concat(), kind="stable")
        return Sample(values=values, k=values.size, seed=seed)
    if k_per_rank < 1:
        raise ValidationError(f"k_per_rank must be >= 1, got {k_per_rank}")
    counts = rank_sample_counts(snapshot.rank_lengths, int(k_per_rank))
    parts = []
    for r, (part, k_r) in enumerate(zip(snapshot.ranks, counts)):
        rng = substream(seed, snapshot.timestep, r)
        idx = rng.integers(0, part.size, size=k_r)
        parts.append(part[idx])
    values = np.sort(np.concatenate(parts), kind="stable")
    return Sample(values=values, k=values.size, seed=int(seed))


def estimate_percentile(sample: Sample, alpha: float) -> float:
    """The ceil(alpha*k) rule applied to the sorted sample."""
    alpha = _check_fraction(alpha)
    return float(sample.values[ceil_rank_index(alpha, sample.k) - 1])


def percentile_vector_from_sample(
    sample: Sample, grid: PercentileGrid, timestep: int, sampling: Sampling
) -> PercentileVector:
    idx = np.array([ceil_rank_index(p, sample.k) - 1 for p in grid.positions])
    return PercentileVector(
        grid=grid, values=sample.values[idx], timestep=timestep, sampling=sampling
    )


def required_sample_size(epsilon: float, delta: float) -> int:
    """Samples needed for rank error <= epsilon with probability >= 1 - delta (DKW)."""
    epsilon, delta = float(epsilon), float(delta)
    if not (0.0 < epsilon < 1.0):
        raise ValidationError(f"epsilon must be in (0, 1), got {epsilon!r}")
    if not (0.0 < delta < 1.0):
        raise ValidationError(f"delta must be in (0, 1), got {delta!r}")
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon) - _INDEX_SNAP)
