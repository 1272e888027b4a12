"""Trajectory ingestion and per-trial exposure metrics.

Logs hold timestamped positions; metrics integrate the field trapezoidally
at the logged sample times. Dose rates stay Sv/h; the 1/3600 conversion
happens only inside the time integral.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .field import RadiationSource, dose_rate

TABLE_PROXIMITY_M = 1.5


@dataclass(frozen=True)
class TrajectorySample:
    t: float  # seconds since trial start
    position: tuple[float, float, float]


@dataclass
class TrajectoryLog:
    times: np.ndarray  # (N,) seconds, strictly increasing, t[0] >= 0
    positions: np.ndarray  # (N, 3) meters

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.times.ndim != 1 or self.positions.shape != (len(self.times), 3):
            raise ValueError("times must be (N,), positions (N, 3)")
        if len(self.times) and self.times[0] < 0:
            raise ValueError("timestamps must be nonnegative")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def samples(self) -> list[TrajectorySample]:
        return [TrajectorySample(float(t), tuple(p)) for t, p in zip(self.times, self.positions)]


@dataclass(frozen=True)
class TrialMetrics:
    cumulative_dose_sv: float
    mean_dose_rate_sv_h: float
    mean_nearest_dist_m: float
    max_dose_rate_sv_h: float
    table_proximity_s: float

    def as_dict(self) -> dict:
        return {
            "cumulative_dose_sv": self.cumulative_dose_sv,
            "mean_dose_rate_sv_h": self.mean_dose_rate_sv_h,
            "mean_nearest_dist_m": self.mean_nearest_dist_m,
            "max_dose_rate_sv_h": self.max_dose_rate_sv_h,
            "table_proximity_s": self.table_proximity_s,
        }


def clean_trajectory(log: TrajectoryLog, room) -> TrajectoryLog:
    """Drop samples beyond the doorway thresholds (outside the room polygon)
    and re-base timestamps to the first kept sample.

    ``room`` needs a ``contains(x, z)`` predicate (boundary inclusive).
    """
    keep = np.array([room.contains(p[0], p[2]) for p in log.positions], dtype=bool)
    if not keep.any():
        raise ValueError("empty after cleaning")
    times = log.times[keep]
    return TrajectoryLog(times - times[0], log.positions[keep])


def compute_metrics(log: TrajectoryLog, scene) -> TrialMetrics:
    """The five per-trial metrics over a cleaned log.

    ``scene`` needs ``sources`` (RadiationSource list) and ``table_anchor``.
    Nearest-source distance is time weighted; table proximity credits an
    interval fully when both endpoints are inside 1.5 m (horizontal) of the
    table anchor, and half when exactly one is.
    """
    if len(log) < 2:
        raise ValueError("need at least 2 samples")
    sources: Sequence[RadiationSource] = scene.sources
    table = np.asarray(scene.table_anchor, dtype=np.float64)

    n = len(log)
    rates = np.empty(n)
    nearest = np.empty(n)
    near_table = np.empty(n, dtype=bool)
    for i in range(n):
        p = log.positions[i]
        rates[i] = dose_rate(p, sources)
        nearest[i] = min(
            math.dist(p, s.position) for s in sources
        )
        dx = p[0] - table[0]
        dz = p[2] - table[2]
        near_table[i] = math.sqrt(dx * dx + dz * dz) <= TABLE_PROXIMITY_M

    duration = log.duration
    if duration <= 0:
        raise ValueError("zero-duration log")

    cumulative = 0.0
    dist_integral = 0.0
    proximity = 0.0
    for i in range(n - 1):
        dt = float(log.times[i + 1] - log.times[i])
        cumulative += 0.5 * (rates[i] + rates[i + 1]) * dt / 3600.0
        dist_integral += 0.5 * (nearest[i] + nearest[i + 1]) * dt
        if near_table[i] and near_table[i + 1]:
            proximity += dt
        elif near_table[i] or near_table[i + 1]:
            proximity += 0.5 * dt

    return TrialMetrics(
        cumulative_dose_sv=cumulative,
        mean_dose_rate_sv_h=cumulative * 3600.0 / duration,
        mean_nearest_dist_m=dist_integral / duration,
        max_dose_rate_sv_h=float(np.max(rates)),
        table_proximity_s=proximity,
    )


def path_side(log: TrajectoryLog, scene) -> tuple[str, bool]:
    """Which side of the partition the first traversal used, and whether that
    is the scene's designated higher-exposure side.

    ``scene`` needs ``partition_z``, ``partition_mid_x``, and
    ``higher_exposure_side`` ("left"/"right"/None). Left means x below the
    partition midline.
    """
    pz = scene.partition_z
    z = log.positions[:, 2] - pz
    for i in range(len(log) - 1):
        a, b = z[i], z[i + 1]
        if a == b:
            continue
        if (a <= 0.0 < b) or (a >= 0.0 > b):
            t = (0.0 - a) / (b - a)
            x_cross = log.positions[i, 0] + t * (log.positions[i + 1, 0] - log.positions[i, 0])
            side = "left" if x_cross < scene.partition_mid_x else "right"
            return side, side == scene.higher_exposure_side
    raise ValueError("no crossing")


TRAJECTORY_HEADER = ["t_s", "x_m", "y_m", "z_m"]


def write_trajectory_csv(log: TrajectoryLog, path: str | Path, sidecar: dict | None = None) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_HEADER)
        for t, p in zip(log.times, log.positions):
            writer.writerow([f"{t:.9g}", f"{p[0]:.9g}", f"{p[1]:.9g}", f"{p[2]:.9g}"])
    if sidecar is not None:
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_trajectory_csv(path: str | Path) -> TrajectoryLog:
    path = Path(path)
    times = []
    positions = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header {header!r} in {path}")
        for row in reader:
            times.append(float(row[0]))
            positions.append([float(row[1]), float(row[2]), float(row[3])])
    return TrajectoryLog(np.array(times), np.array(positions))


def read_sidecar(path: str | Path) -> dict:
    return json.loads(Path(path).with_suffix(".json").read_text())


METRICS_HEADER = [
    "participant",
    "block",
    "trial",
    "scene",
    "encoding",
    "cumulative_dose_sv",
    "mean_dose_rate_sv_h",
    "mean_nearest_dist_m",
    "max_dose_rate_sv_h",
    "table_proximity_s",
    "path_side",
    "took_higher_exposure",
    "scene_designates_side",
]


def write_metrics_csv(rows: list[dict], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_metrics_csv(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            for key in (
                "cumulative_dose_sv",
                "mean_dose_rate_sv_h",
                "mean_nearest_dist_m",
                "max_dose_rate_sv_h",
                "table_proximity_s",
            ):
                row[key] = float(row[key])
            row["block"] = int(row["block"])
            row["trial"] = int(row["trial"])
            row["took_higher_exposure"] = row["took_higher_exposure"] == "True"
            row["scene_designates_side"] = row["scene_designates_side"] == "True"
            rows.append(row)
    return rows
