"""Synthetic walkthrough agents standing in for human trials.

Agents walk entrance -> table -> exit at ~1.4 m/s, logging positions at a
fixed step. The gradient avoider adds a capped repulsion along the falling
dose direction so it swerves around hot spots while still making progress.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exposure import TrajectoryLog
from .field import dose_rate
from .scenes import Scene

WALK_SPEED_M_S = 1.4
SENSOR_HEIGHT_M = 1.6
PARTITION_HALF_THICKNESS_M = 0.075
ARRIVE_TOLERANCE_M = 0.02  # must stay below the partition half thickness
DEFAULT_TIMEOUT_S = 120.0
WALL_MARGIN_M = 0.0


@dataclass(frozen=True)
class WaypointPolicy:
    """Walk straight between waypoints; dwell at any waypoint with a pause."""

    waypoints: tuple[tuple[float, float], ...]  # (x, z)
    dwell_s: dict[int, float] = field(default_factory=dict)  # index -> seconds


@dataclass(frozen=True)
class GradientAvoiderPolicy:
    """Waypoint walker with dose-gradient repulsion, capped to keep progress."""

    waypoints: tuple[tuple[float, float], ...]
    dwell_s: dict[int, float] = field(default_factory=dict)
    repulsion_gain: float = 0.35  # fraction of the step budget spent evading
    probe_m: float = 0.20  # finite-difference probe distance


def default_route(scene: Scene, side: str = "auto", dwell_s: float = 3.0):
    """Entrance -> partition gap -> table -> exit, choosing the gap side.

    side="auto" picks the gap whose midpoint sees the lower dose rate.
    """
    room = scene.room
    ex, ez = room.door_mid("entrance")
    xx, xz = room.door_mid("exit")
    left_gap = (room.partition_x0 / 2.0, room.partition_z)
    right_gap = ((room.partition_x1 + room.width) / 2.0, room.partition_z)
    if side == "auto":
        rates = [
            dose_rate((g[0], SENSOR_HEIGHT_M, g[1]), scene.sources)
            for g in (left_gap, right_gap)
        ]
        gap = left_gap if rates[0] <= rates[1] else right_gap
    elif side == "left":
        gap = left_gap
    elif side == "right":
        gap = right_gap
    else:
        raise ValueError(f"unknown side {side!r}")
    table = (scene.table_anchor[0], scene.table_anchor[2])
    waypoints = ((ex, ez), gap, table, (xx, xz))
    return waypoints, {2: dwell_s}


def _clamp_move(room, x: float, z: float, nx: float, nz: float) -> tuple[float, float]:
    """Keep the step inside the room; the partition slab blocks crossing."""
    nx = min(max(nx, 0.0), room.width)
    nz = min(max(nz, 0.0), room.length)
    lo = room.partition_z - PARTITION_HALF_THICKNESS_M
    hi = room.partition_z + PARTITION_HALF_THICKNESS_M
    in_gap = not (room.partition_x0 <= nx <= room.partition_x1)
    if not in_gap and lo < nz < hi:
        nz = lo if z <= room.partition_z else hi
    if not in_gap and (z <= lo < hi <= nz or nz <= lo < hi <= z):
        nz = lo if z <= lo else hi
    return nx, nz


def simulate_agent(
    scene: Scene,
    policy,
    step_s: float = 0.1,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> TrajectoryLog:
    """Run a policy through the scene; samples are logged every step_s."""
    if not (0.02 <= step_s <= 0.5):
        raise ValueError("step_s must be in [0.02, 0.5]")
    if isinstance(policy, WaypointPolicy):
        avoider = False
    elif isinstance(policy, GradientAvoiderPolicy):
        avoider = True
    else:
        raise TypeError("policy must be WaypointPolicy or GradientAvoiderPolicy")

    room = scene.room
    waypoints = list(policy.waypoints)
    if len(waypoints) < 2:
        raise ValueError("need at least 2 waypoints")

    times = [0.0]
    x, z = waypoints[0]
    positions = [(x, SENSOR_HEIGHT_M, z)]
    t = 0.0
    target_idx = 1
    dwell_left = float(policy.dwell_s.get(0, 0.0))

    while target_idx < len(waypoints):
        if t > timeout_s:
            raise RuntimeError(
                f"agent timed out after {timeout_s} s before reaching waypoint {target_idx}"
            )
        t += step_s
        # Spend the step's time budget exactly, carrying movement across
        # waypoint arrivals so the walked path is step-size independent.
        remaining = step_s
        while remaining > 1e-12 and target_idx < len(waypoints):
            if dwell_left > 0.0:
                used = min(dwell_left, remaining)
                dwell_left -= used
                remaining -= used
                continue
            tx, tz = waypoints[target_idx]
            dist = math.hypot(tx - x, tz - z)
            reach = WALK_SPEED_M_S * remaining
            if dist <= reach:
                x2, z2 = _clamp_move(room, x, z, tx, tz)
                if math.hypot(tx - x2, tz - z2) > ARRIVE_TOLERANCE_M:
                    # blocked short of the waypoint: pinned for the rest
                    x, z = x2, z2
                    remaining = 0.0
                else:
                    x, z = x2, z2
                    remaining -= dist / WALK_SPEED_M_S
                    dwell_left = float(policy.dwell_s.get(target_idx, 0.0))
                    target_idx += 1
            else:
                ux = (tx - x) / dist
                uz = (tz - z) / dist
                if avoider:
                    gx, gz = _dose_gradient(scene, x, z, policy.probe_m)
                    gnorm = math.hypot(gx, gz)
                    if gnorm > 1e-12:
                        # Evade along the falling-dose direction, but keep a
                        # majority of the budget pointed at the target.
                        k = min(policy.repulsion_gain, 0.49)
                        ux = (1.0 - k) * ux - k * gx / gnorm
                        uz = (1.0 - k) * uz - k * gz / gnorm
                        un = math.hypot(ux, uz)
                        ux, uz = ux / un, uz / un
                x, z = _clamp_move(room, x, z, x + ux * reach, z + uz * reach)
                remaining = 0.0
        if target_idx >= len(waypoints) and remaining > 1e-12:
            t -= remaining  # final waypoint reached mid-step: close the log there
        times.append(t)
        positions.append((x, SENSOR_HEIGHT_M, z))

    return TrajectoryLog(np.array(times), np.array(positions))


def _dose_gradient(scene: Scene, x: float, z: float, probe: float) -> tuple[float, float]:
    """Central-difference dose gradient on the walking plane."""
    p = (x, SENSOR_HEIGHT_M, z)
    gx = (
        dose_rate((x + probe, SENSOR_HEIGHT_M, z), scene.sources)
        - dose_rate((x - probe, SENSOR_HEIGHT_M, z), scene.sources)
    ) / (2 * probe)
    gz = (
        dose_rate((x, SENSOR_HEIGHT_M, z + probe), scene.sources)
        - dose_rate((x, SENSOR_HEIGHT_M, z - probe), scene.sources)
    ) / (2 * probe)
    return gx, gz
