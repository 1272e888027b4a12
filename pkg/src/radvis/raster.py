"""Software renderer: per-fragment field shading of triangle meshes.

The GPU pipeline is emulated on the CPU: a rasterization pass fills a
G-buffer (world position, normal, depth), then the shading pass runs the
dose -> normalize -> stencil -> color chain per fragment. The stencil
buffer's two-pass gate becomes a per-fragment threshold test with the same
visible result.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from . import backend, stencil
from .camera import NEAR_PLANE_M, Camera
from .encoding import ColorLut, EncodingSpec, load_viridis, shade_color
from .field import (
    IntensityRange,
    RadiationSource,
    default_range,
    dose_rate,
    normalized_intensity,
    weighted_source_centroid,
)
from .mesh import TriMesh

DEFAULT_BACKGROUND = (128, 128, 128)
BILLBOARD_NEAR_M = 3.5
BILLBOARD_FAR_M = 5.0


@dataclass
class Frame:
    """Render output: RGBA8 color plus a per-pixel view depth in meters."""

    color: np.ndarray  # (H, W, 4) uint8
    depth: np.ndarray  # (H, W) float64; +inf where empty

    def __post_init__(self):
        if self.color.shape[:2] != self.depth.shape:
            raise ValueError("color and depth buffers must match")

    def copy(self) -> "Frame":
        return Frame(self.color.copy(), self.depth.copy())

    def save_png(self, path: str | Path) -> None:
        save_png(self.color, path)


def save_png(rgba: np.ndarray, path: str | Path) -> None:
    arr = np.asarray(rgba)
    mode = "RGBA" if arr.ndim == 3 and arr.shape[2] == 4 else "L"
    Image.fromarray(arr, mode=mode).save(path, format="PNG")


def load_png(path: str | Path) -> np.ndarray:
    return np.asarray(Image.open(path))


def default_threads() -> int:
    return min(8, os.cpu_count() or 1)


@lru_cache(maxsize=4)
def _default_lut() -> ColorLut:
    return load_viridis()


# G-buffer scratch pool: fresh pages fault serially inside the kernels, so
# the internal per-render buffers (never handed to callers) are recycled.
_SCRATCH_POOL: dict[tuple[int, int], list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = {}
_SCRATCH_LOCK = threading.Lock()


def _acquire_gbuffer(height: int, width: int):
    with _SCRATCH_LOCK:
        stack = _SCRATCH_POOL.get((height, width))
        if stack:
            return stack.pop()
    return (
        np.empty((height, width, 3), dtype=np.float64),
        np.empty((height, width, 3), dtype=np.float64),
        np.empty((height, width), dtype=np.uint8),
    )


def _release_gbuffer(height: int, width: int, bufs) -> None:
    with _SCRATCH_LOCK:
        stack = _SCRATCH_POOL.setdefault((height, width), [])
        if len(stack) < 2:
            stack.append(bufs)


def _resolve_field(scene) -> tuple[list[RadiationSource], IntensityRange]:
    """Accept a Scene-like object (``.sources``, optional ``.intensity_range``)
    or a plain source list."""
    if hasattr(scene, "sources"):
        sources = list(scene.sources)
        rng = getattr(scene, "intensity_range", None)
    else:
        sources = list(scene)
        rng = None
    if not sources:
        raise ValueError("no sources")
    if rng is None:
        rng = default_range(sources)
    return sources, rng


def shade_fragment(
    world_pos: Sequence[float],
    normal: Sequence[float],
    scene,
    spec: EncodingSpec,
    lut: ColorLut,
) -> tuple[int, int, int, int] | None:
    """Scalar reference for the full fragment chain; None = stencil skip."""
    sources, rng = _resolve_field(scene)
    i = dose_rate(world_pos, sources)
    u = normalized_intensity(i, rng)
    if spec.is_stencil:
        pattern = stencil.get_pattern(spec.kind)
        if spec.kind == "arrow":
            centroid = weighted_source_centroid(world_pos, sources)
            rotations = tuple(
                stencil.arrow_rotation(plane, world_pos, centroid) for plane in range(3)
            )
        else:
            rotations = (0.0, 0.0, 0.0)
        coverage = stencil.stencil_coverage(
            world_pos, normal, pattern, spec.effective_tile_scale, rotations
        )
        if not stencil.stencil_test(coverage):
            return None
    return shade_color(u, spec, lut)


def _pattern_args(spec: EncodingSpec) -> tuple[int, np.ndarray]:
    if not spec.is_stencil:
        return 0, np.zeros(1)
    pid = backend.PATTERN_IDS[spec.kind]
    if spec.kind == "circle":
        params = [stencil.CIRCLE_RADIUS * stencil.CIRCLE_RADIUS]
    elif spec.kind == "hex":
        params = [stencil.HEX_APOTHEM]
    else:
        params = [
            stencil.ARROW_SHAFT_U0,
            stencil.ARROW_SHAFT_U1,
            stencil.ARROW_SHAFT_HALF_WIDTH,
            stencil.ARROW_TIP_U,
            stencil.ARROW_HEAD_HALF_WIDTH / (stencil.ARROW_TIP_U - stencil.ARROW_SHAFT_U1),
        ]
    return pid, np.asarray(params, dtype=np.float64)


def _field_arrays(sources: Sequence[RadiationSource]) -> tuple[np.ndarray, np.ndarray]:
    pos = np.array([s.position for s in sources], dtype=np.float64)
    rate = np.array([s.rate_at_1m for s in sources], dtype=np.float64)
    return np.ascontiguousarray(pos), np.ascontiguousarray(rate)


def _shade_gbuffer(
    kern,
    pos: np.ndarray,
    nrm: np.ndarray,
    covered: np.ndarray,
    sources,
    rng: IntensityRange,
    spec: EncodingSpec,
    lut: ColorLut,
    mode: int,
    out_rgba: np.ndarray,
    background=(0, 0, 0),
    cam_pos=(0.0, 0.0, 0.0),
    ramp: float = 1.0,
    cutoff_min: bool = False,
    threads: int = 1,
) -> None:
    src_pos, src_rate = _field_arrays(sources)
    pattern_id, pattern_params = _pattern_args(spec)
    kern.shade(
        pos,
        nrm,
        covered,
        src_pos,
        src_rate,
        float(rng.i_min),
        float(rng.i_max),
        backend.KIND_IDS[spec.kind],
        int(spec.bands),
        float(spec.alpha),
        float(spec.effective_tile_scale),
        pattern_id,
        pattern_params,
        np.ascontiguousarray(lut.rgb),
        mode,
        np.asarray(background, dtype=np.uint8),
        np.asarray(cam_pos, dtype=np.float64),
        float(ramp),
        1 if cutoff_min else 0,
        out_rgba,
        int(threads),
    )


def render(
    mesh: TriMesh,
    scene,
    spec: EncodingSpec,
    camera: Camera,
    lut: ColorLut | None = None,
    background: tuple[int, int, int] = DEFAULT_BACKGROUND,
    threads: int | None = None,
    backend_name: str | None = None,
) -> Frame:
    """Perspective render with nearest-wins depth; the mesh base shading is a
    flat headlight gray standing in for the physical world, and the field
    color is alpha-composited over it."""
    if mesh.triangle_count == 0:
        raise ValueError("empty mesh")
    sources, rng = _resolve_field(scene)
    lut = lut or _default_lut()
    threads = threads if threads is not None else default_threads()
    kern = backend.get_kernels(backend_name)

    width, height = camera.resolution
    # the kernel initializes depth/covered in parallel; pos/nrm reads are
    # gated by the covered mask, so recycled buffers are safe.
    depth = np.empty((height, width), dtype=np.float64)
    pos, nrm, covered = _acquire_gbuffer(height, width)
    rgba = np.empty((height, width, 4), dtype=np.uint8)

    right, up, fwd = camera.basis()
    kern.rasterize(
        np.ascontiguousarray(mesh.vertices),
        np.ascontiguousarray(mesh.normals),
        np.ascontiguousarray(mesh.triangles),
        np.asarray(camera.position, dtype=np.float64),
        right,
        up,
        fwd,
        camera.focal(),
        camera.aspect,
        width,
        height,
        NEAR_PLANE_M,
        depth,
        pos,
        nrm,
        covered,
        1,
        threads,
        1,
    )
    _shade_gbuffer(
        kern,
        pos,
        nrm,
        covered,
        sources,
        rng,
        spec,
        lut,
        backend.MODE_COMPOSITE,
        rgba,
        background=background,
        cam_pos=camera.position,
        threads=threads,
    )
    _release_gbuffer(height, width, (pos, nrm, covered))
    return Frame(rgba, depth)


def billboard_overlay(
    frame: Frame,
    scene,
    camera: Camera,
    d_near: float = BILLBOARD_NEAR_M,
    d_far: float = BILLBOARD_FAR_M,
    spec: EncodingSpec | None = None,
    lut: ColorLut | None = None,
    threads: int | None = None,
    backend_name: str | None = None,
) -> Frame:
    """Composite camera-facing field quads for sources beyond d_near.

    Opacity ramps linearly from 0 at d_near to 1 at d_far, fading the plane
    out as the viewer approaches and the mesh shading takes over.
    """
    if not d_near < d_far:
        raise ValueError("d_near must be < d_far")
    sources, rng = _resolve_field(scene)
    spec = spec or EncodingSpec(kind="continuous")
    lut = lut or _default_lut()
    threads = threads if threads is not None else default_threads()
    kern = backend.get_kernels(backend_name)

    out = frame.copy()
    width, height = frame.color.shape[1], frame.color.shape[0]
    cam = np.asarray(camera.position, dtype=np.float64)
    right, up, fwd = camera.basis()

    for src in sources:
        center = src.position_array()
        dist = float(np.linalg.norm(cam - center))
        if dist <= d_near:
            continue
        ramp = min((dist - d_near) / (d_far - d_near), 1.0)
        half = math.sqrt(src.rate_at_1m / rng.i_min)  # u reaches 0 at this radius

        n = (cam - center) / dist
        world_up = np.array([0.0, 1.0, 0.0])
        r = np.cross(world_up, n)
        if np.linalg.norm(r) < 1e-9:
            r = np.cross(np.array([1.0, 0.0, 0.0]), n)
        r = r / np.linalg.norm(r)
        u_axis = np.cross(n, r)

        quad = np.array(
            [
                center - r * half - u_axis * half,
                center + r * half - u_axis * half,
                center + r * half + u_axis * half,
                center - r * half + u_axis * half,
            ]
        )
        quad_n = np.tile(n, (4, 1))
        tris = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)

        pos, nrm, covered = _acquire_gbuffer(height, width)
        covered[:] = 0
        kern.rasterize(
            np.ascontiguousarray(quad),
            np.ascontiguousarray(quad_n),
            tris,
            cam,
            right,
            up,
            fwd,
            camera.focal(),
            camera.aspect,
            width,
            height,
            NEAR_PLANE_M,
            out.depth,
            pos,
            nrm,
            covered,
            0,  # billboards test depth but never occlude
            threads,
        )
        _shade_gbuffer(
            kern,
            pos,
            nrm,
            covered,
            sources,
            rng,
            spec,
            lut,
            backend.MODE_OVERLAY,
            out.color,
            cam_pos=camera.position,
            ramp=ramp,
            cutoff_min=True,
            threads=threads,
        )
        _release_gbuffer(height, width, (pos, nrm, covered))
    return out


def billboard_opacity(dist: float, d_near: float = BILLBOARD_NEAR_M, d_far: float = BILLBOARD_FAR_M) -> float:
    """Opacity of a source's billboard at a given camera distance."""
    if not d_near < d_far:
        raise ValueError("d_near must be < d_far")
    if dist <= d_near:
        return 0.0
    return min((dist - d_near) / (d_far - d_near), 1.0)


def bake_floor_texture(
    scene,
    spec: EncodingSpec,
    extent: tuple[float, float, float, float],
    texels: tuple[int, int] = (256, 256),
    lut: ColorLut | None = None,
    threads: int | None = None,
    backend_name: str | None = None,
) -> np.ndarray:
    """Orthographic top-down shading of the floor plane (y=0, normal up).

    extent is (x0, z0, x1, z1) meters; row 0 of the image is z0. Texels the
    stencil skips stay fully transparent.
    """
    x0, z0, x1, z1 = extent
    nx, nz = texels
    if nx < 64 or nz < 64:
        raise ValueError("bake resolution must be at least 64x64")
    if not (x1 > x0 and z1 > z0):
        raise ValueError("empty bake extent")
    sources, rng = _resolve_field(scene)
    lut = lut or _default_lut()
    threads = threads if threads is not None else default_threads()
    kern = backend.get_kernels(backend_name)

    xs = x0 + (np.arange(nx) + 0.5) * ((x1 - x0) / nx)
    zs = z0 + (np.arange(nz) + 0.5) * ((z1 - z0) / nz)
    gx, gz = np.meshgrid(xs, zs)
    pos = np.zeros((nz, nx, 3), dtype=np.float64)
    pos[..., 0] = gx
    pos[..., 2] = gz
    nrm = np.zeros((nz, nx, 3), dtype=np.float64)
    nrm[..., 1] = 1.0
    covered = np.ones((nz, nx), dtype=np.uint8)
    rgba = np.empty((nz, nx, 4), dtype=np.uint8)
    _shade_gbuffer(
        kern, pos, nrm, covered, sources, rng, spec, lut,
        backend.MODE_BAKE, rgba, threads=threads,
    )
    return rgba


def legend_strip(
    spec: EncodingSpec,
    lut: ColorLut | None = None,
    width: int = 512,
    height: int = 40,
) -> np.ndarray:
    """Horizontal color-scale strip for the active encoding (u: 0 -> 1)."""
    lut = lut or _default_lut()
    img = np.zeros((height, width, 4), dtype=np.uint8)
    for col in range(width):
        u = (col + 0.5) / width
        img[:, col] = shade_color(u, spec, lut)
    return img
