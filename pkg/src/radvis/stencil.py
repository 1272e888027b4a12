"""Stencil patterns and tri-planar projection.

Patterns are analytic indicator functions over the unit tile rather than
bitmap textures: resolution independent, seamlessly periodic, and their
covered-area fractions are known in closed form. The GPU stencil buffer's
two-pass gate is emulated by thresholding blended plane coverage at 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TRIPLANAR_SHARPNESS = 4  # |n|^k weight exponent; keeps shapes crisp at creases

# Shape geometry in tile-local coordinates (origin at tile center).
CIRCLE_RADIUS = 0.40
HEX_APOTHEM = 0.40  # pointy-top; flats face +-U
ARROW_SHAFT_U0 = -0.35
ARROW_SHAFT_U1 = 0.05
ARROW_SHAFT_HALF_WIDTH = 0.10
ARROW_TIP_U = 0.35
ARROW_HEAD_HALF_WIDTH = 0.25

_SQRT3_2 = math.sqrt(3.0) / 2.0


def _circle_mask(x: float, y: float) -> bool:
    return x * x + y * y <= CIRCLE_RADIUS * CIRCLE_RADIUS


def _hex_mask(x: float, y: float) -> bool:
    # Regular pointy-top hexagon: two vertical flats plus four diagonal edges.
    a = HEX_APOTHEM
    return (
        abs(x) <= a
        and abs(0.5 * x + _SQRT3_2 * y) <= a
        and abs(0.5 * x - _SQRT3_2 * y) <= a
    )


def _arrow_mask(x: float, y: float) -> bool:
    # Canonical arrow points +U: rectangular shaft then a triangular head.
    if ARROW_SHAFT_U0 <= x <= ARROW_SHAFT_U1 and abs(y) <= ARROW_SHAFT_HALF_WIDTH:
        return True
    if ARROW_SHAFT_U1 <= x <= ARROW_TIP_U:
        slope = ARROW_HEAD_HALF_WIDTH / (ARROW_TIP_U - ARROW_SHAFT_U1)
        return abs(y) <= (ARROW_TIP_U - x) * slope
    return False


def _circle_duty() -> float:
    return math.pi * CIRCLE_RADIUS**2


def _hex_duty() -> float:
    return 2.0 * math.sqrt(3.0) * HEX_APOTHEM**2


def _arrow_duty() -> float:
    shaft = (ARROW_SHAFT_U1 - ARROW_SHAFT_U0) * 2.0 * ARROW_SHAFT_HALF_WIDTH
    head = 0.5 * (ARROW_TIP_U - ARROW_SHAFT_U1) * 2.0 * ARROW_HEAD_HALF_WIDTH
    return shaft + head


@dataclass(frozen=True)
class StencilPattern:
    """Analytic coverage mask over the unit tile, with its covered fraction."""

    kind: str
    mask_local: Callable[[float, float], bool] = field(repr=False)
    duty_cycle: float = 0.0

    def mask(self, u: float, v: float) -> bool:
        """Periodic mask over tile coordinates: evaluate in tile-local frame."""
        lu = (u - math.floor(u)) - 0.5
        lv = (v - math.floor(v)) - 0.5
        return self.mask_local(lu, lv)


PATTERNS = {
    "circle": StencilPattern("circle", _circle_mask, _circle_duty()),
    "hex": StencilPattern("hex", _hex_mask, _hex_duty()),
    "arrow": StencilPattern("arrow", _arrow_mask, _arrow_duty()),
}


def get_pattern(kind: str) -> StencilPattern:
    try:
        return PATTERNS[kind]
    except KeyError:
        raise ValueError(f"no stencil pattern for kind {kind!r}") from None


def triplanar_weights(normal: Sequence[float]) -> tuple[float, float, float]:
    """Per-axis blend weights |n_a|^k / sum, k=4. Sums to 1."""
    nx, ny, nz = (float(c) for c in normal)
    if math.sqrt(nx * nx + ny * ny + nz * nz) <= 1e-6:
        raise ValueError("degenerate normal")
    ax, ay, az = abs(nx), abs(ny), abs(nz)
    px, py, pz = (ax * ax) * (ax * ax), (ay * ay) * (ay * ay), (az * az) * (az * az)
    total = px + py + pz
    return px / total, py / total, pz / total


def plane_uv(plane: int, p: Sequence[float]) -> tuple[float, float]:
    """Project a world point onto one of the three axis-aligned planes.

    Plane 0 (normal +-X) -> (z, y); plane 1 (+-Y, floors) -> (x, z);
    plane 2 (+-Z) -> (x, y).
    """
    x, y, z = (float(c) for c in p)
    if plane == 0:
        return z, y
    if plane == 1:
        return x, z
    if plane == 2:
        return x, y
    raise ValueError("plane index must be 0, 1, or 2")


def arrow_rotation(plane: int, world_pos: Sequence[float], centroid: Sequence[float]) -> float:
    """Rotation (radians) aiming the arrow's +U heading away from the centroid.

    Falls back to 0 when the away direction projects to (near) nothing on the
    plane, e.g. a fragment directly above the centroid on the floor plane.
    """
    dx = float(world_pos[0]) - float(centroid[0])
    dy = float(world_pos[1]) - float(centroid[1])
    dz = float(world_pos[2]) - float(centroid[2])
    du, dv = plane_uv(plane, (dx, dy, dz))
    if math.sqrt(du * du + dv * dv) < 1e-6:
        return 0.0
    return math.atan2(dv, du)


def stencil_coverage(
    world_pos: Sequence[float],
    normal: Sequence[float],
    pattern: StencilPattern,
    tile_scale: float,
    rotations: Sequence[float] = (0.0, 0.0, 0.0),
) -> float:
    """Blend the pattern's three plane projections by tri-planar weights.

    Each plane's stamp is rotated about its tile center; rotation 0 leaves
    the plain periodic tiling.
    """
    if tile_scale <= 0:
        raise ValueError("tile_scale must be > 0")
    weights = triplanar_weights(normal)
    coverage = 0.0
    for plane in range(3):
        w = weights[plane]
        if w == 0.0:
            continue
        pu, pv = plane_uv(plane, world_pos)
        u = pu / tile_scale
        v = pv / tile_scale
        lu = (u - math.floor(u)) - 0.5
        lv = (v - math.floor(v)) - 0.5
        theta = float(rotations[plane])
        if theta != 0.0:
            c = math.cos(theta)
            s = math.sin(theta)
            # Rotate sampling coords by -theta so the stamp appears at +theta.
            lu, lv = c * lu + s * lv, -s * lu + c * lv
        if pattern.mask_local(lu, lv):
            coverage += w
    return coverage


def stencil_test(coverage: float) -> bool:
    """Drawn iff coverage >= 0.5; emulates the stencil-buffer gate."""
    if not (0.0 <= coverage <= 1.0):
        raise ValueError("coverage must be in [0, 1]")
    return coverage >= 0.5


def pattern_preview(kind: str, size: int = 512) -> np.ndarray:
    """Rasterize one tile of a pattern to a grayscale image (covered=white)."""
    pattern = get_pattern(kind)
    img = np.zeros((size, size), dtype=np.uint8)
    for row in range(size):
        v = (row + 0.5) / size
        for col in range(size):
            u = (col + 0.5) / size
            # Image rows grow downward; flip V so +V renders upward.
            if pattern.mask(u, 1.0 - v):
                img[row, col] = 255
    return img
