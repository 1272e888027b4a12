"""Experiment scenes: the 4.5 x 8.5 m room, doors, partition, card table,
and three sources per scene.

The bundled layouts are plausible reconstructions (marked non-canonical in
the JSON files): the room dimensions and source strength are fixed, the
source placements are ours. Coordinates: x across the room (width), z along
it (length), y up. "Left" means x below the partition midline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .field import IntensityRange, RadiationSource

ROOM_WIDTH_M = 4.5
ROOM_LENGTH_M = 8.5
PARTITION_Z_M = 4.5
SCENE_NAMES = ("scene_01", "scene_02", "scene_03", "scene_04", "scene_05")
TRAINING_SCENE = "scene_training"


@dataclass(frozen=True)
class Room:
    width: float = ROOM_WIDTH_M
    length: float = ROOM_LENGTH_M
    partition_z: float = PARTITION_Z_M
    partition_x0: float = 0.9
    partition_x1: float = 3.6
    entrance_z: tuple[float, float] = (0.35, 1.25)  # on the x=0 wall
    exit_z: tuple[float, float] = (7.25, 8.15)

    def contains(self, x: float, z: float) -> bool:
        """Inside the room polygon, boundary inclusive."""
        return 0.0 <= x <= self.width and 0.0 <= z <= self.length

    @property
    def partition_mid_x(self) -> float:
        return 0.5 * (self.partition_x0 + self.partition_x1)

    def door_mid(self, which: str) -> tuple[float, float]:
        z0, z1 = self.entrance_z if which == "entrance" else self.exit_z
        return 0.0, 0.5 * (z0 + z1)


@dataclass(frozen=True)
class Scene:
    name: str
    room: Room
    sources: tuple[RadiationSource, ...]
    table_anchor: tuple[float, float, float]
    higher_exposure_side: str | None = None
    canonical: bool = False
    intensity_range: IntensityRange | None = None

    @property
    def partition_z(self) -> float:
        return self.room.partition_z

    @property
    def partition_mid_x(self) -> float:
        return self.room.partition_mid_x

    def contains(self, x: float, z: float) -> bool:
        return self.room.contains(x, z)


def validate_scene(scene: Scene) -> list[str]:
    """Invariant diagnostics; empty list means the scene is well formed."""
    issues = []
    room = scene.room
    if len(scene.sources) != 3:
        issues.append(f"expected exactly 3 sources, got {len(scene.sources)}")
    for i, s in enumerate(scene.sources):
        x, y, z = s.position
        if not (0.0 <= x <= room.width and 0.0 <= z <= room.length):
            issues.append(f"source {i} outside room footprint: {s.position}")
        if y < 0.0:
            issues.append(f"source {i} below the floor: {s.position}")
    if not (0.0 < room.partition_x0 and room.partition_x1 < room.width):
        issues.append("partition must leave walkable gaps on both sides")
    if room.partition_x0 >= room.partition_x1:
        issues.append("partition segment is inverted or empty")
    if not (0.0 < room.partition_z < room.length):
        issues.append("partition must lie inside the room")
    ez0, ez1 = room.entrance_z
    xz0, xz1 = room.exit_z
    if not (0.0 <= ez0 < ez1 <= room.length and 0.0 <= xz0 < xz1 <= room.length):
        issues.append("door segments must lie on the side wall")
    if max(ez0, xz0) < min(ez1, xz1):
        issues.append("entrance and exit doors overlap")
    half = room.length / 2.0
    if not ((ez1 <= half) != (xz1 <= half)):
        issues.append("doors must sit at opposite ends of the side wall")
    tx, _, tz = scene.table_anchor
    if not room.contains(tx, tz):
        issues.append("table anchor outside the room")
    if scene.higher_exposure_side not in (None, "left", "right"):
        issues.append(f"bad higher_exposure_side: {scene.higher_exposure_side!r}")
    return issues


def scene_from_dict(doc: dict) -> Scene:
    r = doc.get("room", {})
    room = Room(
        width=r.get("width_m", ROOM_WIDTH_M),
        length=r.get("length_m", ROOM_LENGTH_M),
        partition_z=r.get("partition_z_m", PARTITION_Z_M),
        partition_x0=r.get("partition_x0_m", 0.9),
        partition_x1=r.get("partition_x1_m", 3.6),
        entrance_z=tuple(doc.get("doors", {}).get("entrance_z_m", (0.35, 1.25))),
        exit_z=tuple(doc.get("doors", {}).get("exit_z_m", (7.25, 8.15))),
    )
    sources = tuple(
        RadiationSource(tuple(s["position_m"]), s["rate_sv_h_at_1m"])
        for s in doc["sources"]
    )
    rng = None
    if "intensity_range_sv_h" in doc:
        lo, hi = doc["intensity_range_sv_h"]
        rng = IntensityRange(lo, hi)
    return Scene(
        name=doc["name"],
        room=room,
        sources=sources,
        table_anchor=tuple(doc["table_anchor_m"]),
        higher_exposure_side=doc.get("higher_exposure_side"),
        canonical=bool(doc.get("canonical", False)),
        intensity_range=rng,
    )


def scene_to_dict(scene: Scene) -> dict:
    doc = {
        "name": scene.name,
        "canonical": scene.canonical,
        "room": {
            "width_m": scene.room.width,
            "length_m": scene.room.length,
            "partition_z_m": scene.room.partition_z,
            "partition_x0_m": scene.room.partition_x0,
            "partition_x1_m": scene.room.partition_x1,
        },
        "doors": {
            "wall": "x0",
            "entrance_z_m": list(scene.room.entrance_z),
            "exit_z_m": list(scene.room.exit_z),
        },
        "sources": [
            {"position_m": list(s.position), "rate_sv_h_at_1m": s.rate_at_1m}
            for s in scene.sources
        ],
        "table_anchor_m": list(scene.table_anchor),
        "higher_exposure_side": scene.higher_exposure_side,
    }
    if scene.intensity_range is not None:
        doc["intensity_range_sv_h"] = [scene.intensity_range.i_min, scene.intensity_range.i_max]
    return doc


def load_scene(path_or_name: str | Path) -> Scene:
    """Load a scene JSON from a path, or a bundled scene by name."""
    path = Path(path_or_name)
    if path.suffix == ".json" and path.exists():
        doc = json.loads(path.read_text())
    else:
        name = str(path_or_name)
        try:
            text = resources.files("radvis").joinpath(f"data/scenes/{name}.json").read_text()
        except FileNotFoundError:
            raise FileNotFoundError(f"no scene file or bundled scene named {path_or_name!r}") from None
        doc = json.loads(text)
    scene = scene_from_dict(doc)
    issues = validate_scene(scene)
    if issues:
        raise ValueError(f"invalid scene {scene.name}: " + "; ".join(issues))
    return scene


def bundled_scene_names() -> list[str]:
    return [*SCENE_NAMES, TRAINING_SCENE]


def load_bundled_scenes() -> dict[str, Scene]:
    return {name: load_scene(name) for name in bundled_scene_names()}


def fig_style_demo_sources() -> list[RadiationSource]:
    """Three 1 mSv/h sources over a 4 x 4 m plane, used by the demo renders."""
    return [
        RadiationSource((1.0, 0.25, 1.0), 0.001),
        RadiationSource((3.0, 0.25, 1.4), 0.001),
        RadiationSource((2.0, 0.25, 3.0), 0.001),
    ]
