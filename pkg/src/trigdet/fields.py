"""Data model and file I/O for time series of rank-partitioned scalar fields.

On disk a series is a JSON manifest plus one raw data file per timestep. The
data file is the concatenation of the rank partitions in rank order, each
value a little-endian 64-bit IEEE float with no header, so a write/load round
trip is bit-exact. Small hand-written fixtures can instead be given as CSV
(one row per point: timestep,rank,value).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

MANIFEST_VERSION = 1


def _as_readonly_f64(values, *, timestep: int, rank: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"rank {rank} partition at timestep {timestep} must be 1-D")
    if arr.size == 0:
        raise ValidationError(f"rank {rank} partition at timestep {timestep} is empty")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"non-finite value {arr[i]!r} at timestep {timestep}, rank {rank}, index {i}"
        )
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FieldSnapshot:
    """One timestep of a scalar field, partitioned across ranks.

    Values are finite float64; partitions are non-empty and immutable.
    """

    timestep: int
    ranks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.timestep, (int, np.integer)) or self.timestep < 0:
            raise ValidationError(f"timestep must be a non-negative integer, got {self.timestep!r}")
        object.__setattr__(self, "timestep", int(self.timestep))
        if len(self.ranks) == 0:
            raise ValidationError(f"snapshot at timestep {self.timestep} has no ranks")
        normed = tuple(
            _as_readonly_f64(part, timestep=self.timestep, rank=r)
            for r, part in enumerate(self.ranks)
        )
        object.__setattr__(self, "ranks", normed)

    @property
    def n_ranks(self) -> int:
        return len(self.ranks)

    @property
    def rank_lengths(self) -> tuple[int, ...]:
        return tuple(len(part) for part in self.ranks)

    @property
    def n_points(self) -> int:
        return sum(self.rank_lengths)

    def concat(self) -> np.ndarray:
        """All values in rank order, as one array."""
        return np.concatenate(self.ranks)


@dataclass(frozen=True)
class FieldSeries:
    """Snapshots ordered by strictly increasing timestep, with a fixed rank layout.

    The manifest format stores one rank_lengths vector for the whole series, so
    partition lengths must match across snapshots (rank count constant, and
    each rank's length constant too).
    """

    snapshots: tuple[FieldSnapshot, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        if not self.snapshots:
            raise ValidationError("series has no snapshots")
        ts = [s.timestep for s in self.snapshots]
        for a, b in zip(ts, ts[1:]):
            if b <= a:
                raise ValidationError(f"timesteps must be strictly increasing, got {a} then {b}")
        layout = self.snapshots[0].rank_lengths
        for s in self.snapshots[1:]:
            if s.rank_lengths != layout:
                raise ValidationError(
                    f"rank layout changed at timestep {s.timestep}: "
                    f"{layout} -> {s.rank_lengths}"
                )

    @property
    def n_steps(self) -> int:
        return len(self.snapshots)

    @property
    def n_ranks(self) -> int:
        return self.snapshots[0].n_ranks

    @property
    def rank_lengths(self) -> tuple[int, ...]:
        return self.snapshots[0].rank_lengths

    @property
    def timesteps(self) -> tuple[int, ...]:
        return tuple(s.timestep for s in self.snapshots)

    @property
    def timestep_stride(self) -> int | None:
        """Common spacing between timesteps, or None if non-uniform or single-step."""
        ts = self.timesteps
        if len(ts) < 2:
            return None
        strides = {b - a for a, b in zip(ts, ts[1:])}
        return strides.pop() if len(strides) == 1 else None


def write_series(series: FieldSeries, out_dir: str | Path, prefix: str = "field") -> Path:
    """Write manifest plus per-step data files under out_dir; returns the manifest path.

    Distinct prefixes let several series share a directory.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_files = []
    for snap in series.snapshots:
        name = f"{prefix}_t{snap.timestep:06d}.f64"
        (out_dir / name).write_bytes(snap.concat().astype("<f8").tobytes())
        data_files.append(name)
    manifest = {
        "version": MANIFEST_VERSION,
        "n_steps": series.n_steps,
        "n_ranks": series.n_ranks,
        "rank_lengths": list(series.rank_lengths),
        "timesteps": list(series.timesteps),
        "data_files": data_files,
    }
    manifest_path = out_dir / f"{prefix}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def _load_manifest(path: Path) -> dict:
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed manifest {path}: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ValidationError(f"malformed manifest {path}: expected a JSON object")
    required = ("version", "n_steps", "n_ranks", "rank_lengths", "timesteps", "data_files")
    missing = [k for k in required if k not in manifest]
    if missing:
        raise ValidationError(f"manifest {path} missing fields: {', '.join(missing)}")
    if manifest["version"] != MANIFEST_VERSION:
        raise ValidationError(f"manifest {path}: unsupported version {manifest['version']!r}")
    n_steps = manifest["n_steps"]
    if len(manifest["timesteps"]) != n_steps or len(manifest["data_files"]) != n_steps:
        raise ValidationError(
            f"manifest {path}: n_steps={n_steps} but lists have "
            f"{len(manifest['timesteps'])} timesteps / {len(manifest['data_files'])} files"
        )
    if len(manifest["rank_lengths"]) != manifest["n_ranks"]:
        raise ValidationError(
            f"manifest {path}: n_ranks={manifest['n_ranks']} but "
            f"{len(manifest['rank_lengths'])} rank_lengths"
        )
    return manifest


def _load_manifest_series(manifest_path: Path) -> FieldSeries:
    manifest = _load_manifest(manifest_path)
    rank_lengths = [int(n) for n in manifest["rank_lengths"]]
    if any(n <= 0 for n in rank_lengths):
        raise ValidationError(f"manifest {manifest_path}: rank_lengths must be positive")
    n_values = sum(rank_lengths)
    snapshots = []
    for t, rel in zip(manifest["timesteps"], manifest["data_files"]):
        data_path = manifest_path.parent / rel
        if not data_path.exists():
            raise FileNotFoundError(f"data file {data_path} (timestep {t}) is missing")
        raw = data_path.read_bytes()
        if len(raw) != 8 * n_values:
            raise ValidationError(
                f"data file {data_path} (timestep {t}): expected {n_values} values "
                f"({8 * n_values} bytes), found {len(raw)} bytes"
            )
        flat = np.frombuffer(raw, dtype="<f8")
        parts = np.split(flat, np.cumsum(rank_lengths)[:-1])
        snapshots.append(FieldSnapshot(timestep=int(t), ranks=tuple(parts)))
    return FieldSeries(snapshots=tuple(snapshots))


def _load_csv_series(path: Path) -> FieldSeries:
    # Fixture format: timestep,rank,value rows; header optional; rows in any order
    # but within one (timestep, rank) group the file order defines point order.
    groups: dict[int, dict[int, list[float]]] = {}
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and not row[0].strip().lstrip("+-").isdigit():
                continue  # header
            if len(row) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                t, r, v = int(row[0]), int(row[1]), float(row[2])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            if not math.isfinite(v):
                raise ValidationError(
                    f"{path}:{lineno}: non-finite value {v!r} at timestep {t}, rank {r}"
                )
            groups.setdefault(t, {}).setdefault(r, []).append(v)
    if not groups:
        raise ValidationError(f"{path}: no data rows")
    snapshots = []
    for t in sorted(groups):
        by_rank = groups[t]
        n_ranks = max(by_rank) + 1
        if sorted(by_rank) != list(range(n_ranks)):
            raise ValidationError(
                f"{path}: timestep {t} has ranks {sorted(by_rank)}, expected 0..{n_ranks - 1}"
            )
        snapshots.append(
            FieldSnapshot(timestep=t, ranks=tuple(np.array(by_rank[r]) for r in range(n_ranks)))
        )
    return FieldSeries(snapshots=tuple(snapshots))


def load_series(path: str | Path) -> FieldSeries:
    """Load a series from a JSON manifest, or from a .csv fixture file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    if path.suffix.lower() == ".csv":
        return _load_csv_series(path)
    return _load_manifest_series(path)
