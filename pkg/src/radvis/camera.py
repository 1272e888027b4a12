"""Pinhole camera: look-at view transform and perspective projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEAR_PLANE_M = 0.05


@dataclass(frozen=True)
class Camera:
    position: tuple[float, float, float]
    look_at: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    fov_deg: float = 60.0
    resolution: tuple[int, int] = (640, 360)  # (width, height)

    def __post_init__(self):
        if not (10.0 < self.fov_deg < 120.0):
            raise ValueError("vertical fov must be in (10, 120) degrees")
        w, h = self.resolution
        if w < 16 or h < 16:
            raise ValueError("resolution must be at least 16x16")
        fwd = np.array(self.look_at, dtype=float) - np.array(self.position, dtype=float)
        if np.linalg.norm(fwd) < 1e-9:
            raise ValueError("camera position and look_at coincide")

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward) in world space."""
        fwd = np.array(self.look_at, dtype=float) - np.array(self.position, dtype=float)
        fwd = fwd / np.linalg.norm(fwd)
        upv = np.array(self.up, dtype=float)
        right = np.cross(fwd, upv)
        n = np.linalg.norm(right)
        if n < 1e-9:  # up parallel to view: pick any perpendicular
            upv = np.array([1.0, 0.0, 0.0]) if abs(fwd[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
            right = np.cross(fwd, upv)
            n = np.linalg.norm(right)
        right = right / n
        up = np.cross(right, fwd)
        return right, up, fwd

    def focal(self) -> float:
        return 1.0 / math.tan(math.radians(self.fov_deg) / 2.0)

    @property
    def aspect(self) -> float:
        w, h = self.resolution
        return w / h
