"""Triangle meshes standing in for the headset's spatial-awareness mesh.

Supports a v/vn/f subset of OBJ plus a JSON form. Normals are recomputed
(area weighted) when absent, and zero-area triangles are dropped on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEGENERATE_AREA = 1e-12  # m^2


@dataclass
class TriMesh:
    vertices: np.ndarray  # (V, 3) float64, meters
    normals: np.ndarray  # (V, 3) float64, unit
    triangles: np.ndarray  # (T, 3) int32 indices

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.normals = np.ascontiguousarray(self.normals, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int32)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be (V, 3)")
        if self.normals.shape != self.vertices.shape:
            raise ValueError("normals must match vertices")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be (T, 3)")
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise ValueError("triangle index out of range")
        lengths = np.linalg.norm(self.normals, axis=1)
        if self.normals.size and not np.all(np.abs(lengths - 1.0) <= 1e-3):
            raise ValueError("normals must be unit length (+-1e-3)")

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)


def _triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def _drop_degenerate(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    if len(triangles) == 0:
        return triangles
    return triangles[_triangle_areas(vertices, triangles) > DEGENERATE_AREA]


def compute_vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted vertex normals (cross products summed, then normalized)."""
    normals = np.zeros_like(vertices)
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    face = np.cross(b - a, c - a)  # length = 2 * area
    for k in range(3):
        np.add.at(normals, triangles[:, k], face)
    lengths = np.linalg.norm(normals, axis=1)
    zero = lengths < 1e-20
    normals[zero] = (0.0, 1.0, 0.0)  # unreferenced vertices get a default
    lengths[zero] = 1.0
    return normals / lengths[:, None]


def build_mesh(
    vertices: np.ndarray, triangles: np.ndarray, normals: np.ndarray | None = None
) -> TriMesh:
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int32)
    triangles = _drop_degenerate(vertices, triangles)
    if normals is None:
        normals = compute_vertex_normals(vertices, triangles)
    else:
        normals = np.asarray(normals, dtype=np.float64)
        lengths = np.linalg.norm(normals, axis=1)
        lengths[lengths < 1e-20] = 1.0
        normals = normals / lengths[:, None]
    return TriMesh(vertices=vertices, normals=normals, triangles=triangles)


def load_obj(path: str | Path) -> TriMesh:
    """Load a v/vn/f OBJ subset. Faces may be polygons (fanned) and may carry
    v//vn or v/vt/vn references; positions index the v list."""
    vertices: list[list[float]] = []
    normals_raw: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    face_normal_refs: list[tuple[int, int, int]] = []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        if tag == "v":
            vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif tag == "vn":
            normals_raw.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif tag == "f":
            refs = []
            for token in parts[1:]:
                fields = token.split("/")
                vi = int(fields[0])
                ni = int(fields[2]) if len(fields) >= 3 and fields[2] else 0
                refs.append((vi, ni))
            for i in range(1, len(refs) - 1):  # fan triangulation
                tri = (refs[0], refs[i], refs[i + 1])
                faces.append(tuple(_obj_index(r[0], len(vertices)) for r in tri))
                face_normal_refs.append(tuple(r[1] for r in tri))
    if not vertices or not faces:
        raise ValueError(f"no geometry in OBJ file {path}")
    verts = np.array(vertices, dtype=np.float64)
    tris = np.array(faces, dtype=np.int32)

    normals = None
    if normals_raw and all(all(n > 0 for n in refs) for refs in face_normal_refs):
        # Per-vertex normals from the vn table; last reference wins per vertex.
        table = np.array(normals_raw, dtype=np.float64)
        normals = np.zeros_like(verts)
        seen = np.zeros(len(verts), dtype=bool)
        for tri, refs in zip(tris, face_normal_refs):
            for vi, ni in zip(tri, refs):
                normals[vi] = table[ni - 1]
                seen[vi] = True
        if not seen.all():
            normals = None
    return build_mesh(verts, tris, normals)


def _obj_index(ref: int, count: int) -> int:
    return ref - 1 if ref > 0 else count + ref


def save_obj(mesh: TriMesh, path: str | Path) -> None:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for n in mesh.normals:
        lines.append(f"vn {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
    for t in mesh.triangles:
        lines.append(f"f {t[0]+1}//{t[0]+1} {t[1]+1}//{t[1]+1} {t[2]+1}//{t[2]+1}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_json_mesh(path: str | Path) -> TriMesh:
    """JSON mesh: {"vertices": [[x,y,z]...], "triangles": [[a,b,c]...],
    "normals": optional}."""
    doc = json.loads(Path(path).read_text())
    normals = np.array(doc["normals"], dtype=np.float64) if "normals" in doc else None
    return build_mesh(
        np.array(doc["vertices"], dtype=np.float64),
        np.array(doc["triangles"], dtype=np.int32),
        normals,
    )


def load_mesh(path: str | Path) -> TriMesh:
    p = Path(path)
    if p.suffix.lower() == ".json":
        return load_json_mesh(p)
    return load_obj(p)


def make_plane(
    size_x: float = 4.0,
    size_z: float = 4.0,
    divisions: int = 1,
    y: float = 0.0,
    origin: tuple[float, float] = (0.0, 0.0),
) -> TriMesh:
    """Flat plane in the y=const plane, normal +Y, subdivided into a grid."""
    n = divisions + 1
    xs = origin[0] + np.linspace(0.0, size_x, n)
    zs = origin[1] + np.linspace(0.0, size_z, n)
    gx, gz = np.meshgrid(xs, zs, indexing="xy")
    verts = np.column_stack([gx.ravel(), np.full(gx.size, float(y)), gz.ravel()])
    tris = []
    for r in range(divisions):
        for c in range(divisions):
            i0 = r * n + c
            i1 = i0 + 1
            i2 = i0 + n
            i3 = i2 + 1
            tris.append((i0, i2, i1))
            tris.append((i1, i2, i3))
    normals = np.tile(np.array([0.0, 1.0, 0.0]), (len(verts), 1))
    return TriMesh(verts, normals, np.array(tris, dtype=np.int32))


def _quad(verts: list, tris: list, corners: list[tuple[float, float, float]]) -> None:
    base = len(verts)
    verts.extend(corners)
    tris.append((base, base + 1, base + 2))
    tris.append((base, base + 2, base + 3))


def make_room_mesh(
    width: float = 4.5,
    length: float = 8.5,
    height: float = 2.6,
    partition_z: float = 4.5,
    partition_x0: float = 0.9,
    partition_x1: float = 3.6,
    floor_divisions: int = 24,
) -> TriMesh:
    """Experiment room: subdivided floor, four walls, and the partition slab."""
    plane = make_plane(width, length, floor_divisions)
    verts = [tuple(v) for v in plane.vertices]
    tris = [tuple(t) for t in plane.triangles]
    h = height
    _quad(verts, tris, [(0, 0, 0), (width, 0, 0), (width, h, 0), (0, h, 0)])
    _quad(verts, tris, [(0, 0, length), (0, h, length), (width, h, length), (width, 0, length)])
    _quad(verts, tris, [(0, 0, 0), (0, h, 0), (0, h, length), (0, 0, length)])
    _quad(verts, tris, [(width, 0, 0), (width, 0, length), (width, h, length), (width, h, 0)])
    for face_z in (partition_z - 0.05, partition_z + 0.05):
        _quad(
            verts,
            tris,
            [
                (partition_x0, 0, face_z),
                (partition_x1, 0, face_z),
                (partition_x1, h, face_z),
                (partition_x0, h, face_z),
            ],
        )
    return build_mesh(np.array(verts), np.array(tris, dtype=np.int32))
