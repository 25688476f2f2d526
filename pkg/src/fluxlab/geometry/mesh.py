"""Triangle mesh container and STL/OBJ input/output.

Units are millimeters.  Meshes are immutable after construction; loading
merges duplicate vertices (1e-6 mm) and drops degenerate triangles, then
computes a watertightness flag from an edge-manifold check.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MERGE_TOL = 1e-6  # mm, vertex welding tolerance at load time
DEGENERATE_AREA = 1e-12  # mm^2, triangles thinner than this get dropped


class MeshError(ValueError):
    """Unusable mesh input (empty, unreadable, non-triangulated...)."""


class NotWatertightError(MeshError):
    """Operation requires a closed, edge-manifold surface."""


@dataclass(frozen=True)
class TriMesh:
    """Indexed triangle mesh with an optional per-vertex color channel."""

    vertices: np.ndarray  # (n, 3) float64, mm
    triangles: np.ndarray  # (m, 3) int32
    colors: np.ndarray | None = None  # (n, 3) float in [0, 1]
    watertight: bool = field(default=False)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int32))
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError(f"triangles must be (m, 3), got {t.shape}")
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise MeshError("triangle index out of range")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "watertight", _is_edge_manifold(t))

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def with_colors(self, colors: np.ndarray) -> "TriMesh":
        colors = np.asarray(colors, dtype=np.float64)
        if colors.shape != (len(self.vertices), 3):
            raise MeshError("colors must be (n_vertices, 3)")
        return TriMesh(self.vertices, self.triangles, colors)

    def transformed(self, rotation: np.ndarray | None = None,
                    translation: np.ndarray | None = None) -> "TriMesh":
        v = self.vertices
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=np.float64).T
        if translation is not None:
            v = v + np.asarray(translation, dtype=np.float64)
        return TriMesh(v, self.triangles, self.colors)


def _is_edge_manifold(triangles: np.ndarray) -> bool:
    """True iff every edge is shared by exactly two triangles."""
    if len(triangles) == 0:
        return False
    edges = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]],
                            triangles[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    return bool(np.all(counts == 2))


def clean_mesh(vertices: np.ndarray, triangles: np.ndarray) -> TriMesh:
    """Weld duplicate vertices at MERGE_TOL and drop degenerate triangles."""
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    if len(triangles) == 0 or len(vertices) == 0:
        raise MeshError("empty mesh")
    # Weld by quantized coordinate key.
    key = np.round(vertices / MERGE_TOL).astype(np.int64)
    _, first, inverse = np.unique(key, axis=0, return_index=True,
                                  return_inverse=True)
    welded = vertices[np.sort(first)]
    # np.unique sorts keys, remap inverse to the position-of-first ordering
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    tri = rank[inverse][triangles]
    # degenerate = repeated index or (near) zero area
    distinct = ((tri[:, 0] != tri[:, 1]) & (tri[:, 1] != tri[:, 2])
                & (tri[:, 0] != tri[:, 2]))
    tri = tri[distinct]
    if len(tri) == 0:
        raise MeshError("mesh has no non-degenerate triangles")
    a = welded[tri[:, 1]] - welded[tri[:, 0]]
    b = welded[tri[:, 2]] - welded[tri[:, 0]]
    area2 = np.linalg.norm(np.cross(a, b), axis=1)
    tri = tri[area2 > 2 * DEGENERATE_AREA]
    if len(tri) == 0:
        raise MeshError("mesh has no non-degenerate triangles")
    return TriMesh(welded, tri)


def load_mesh(path: str | Path) -> TriMesh:
    """Read a binary/ASCII STL or an OBJ file and clean it.

    Raises MeshError for unreadable files, non-triangulated OBJ faces and
    empty meshes.
    """
    path = Path(path)
    if not path.exists():
        raise MeshError(f"no such file: {path}")
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _load_obj(path)
    if suffix == ".stl":
        return _load_stl(path)
    raise MeshError(f"unsupported mesh format: {path.suffix!r}")


def _load_obj(path: Path) -> TriMesh:
    vertices, faces = [], []
    with open(path, "r", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: malformed vertex")
                vertices.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                idx = [p.split("/")[0] for p in parts[1:]]
                if len(idx) != 3:
                    raise MeshError(
                        f"{path}:{lineno}: non-triangulated face "
                        f"({len(idx)} vertices)")
                faces.append([int(i) - 1 if int(i) > 0 else len(vertices) + int(i)
                              for i in idx])
    if not faces:
        raise MeshError(f"{path}: no faces found")
    return clean_mesh(np.array(vertices), np.array(faces))


def _load_stl(path: Path) -> TriMesh:
    raw = path.read_bytes()
    if len(raw) < 15:
        raise MeshError(f"{path}: truncated STL")
    # ASCII STL starts with 'solid' and actually contains 'facet' text;
    # some binary exporters also write 'solid' into the 80-byte header.
    if raw[:5].lower() == b"solid" and b"facet" in raw[:500]:
        return _load_stl_ascii(raw.decode("ascii", errors="replace"), path)
    return _load_stl_binary(raw, path)


def _load_stl_binary(raw: bytes, path: Path) -> TriMesh:
    if len(raw) < 84:
        raise MeshError(f"{path}: truncated binary STL")
    (count,) = struct.unpack_from("<I", raw, 80)
    expected = 84 + count * 50
    if len(raw) < expected:
        raise MeshError(f"{path}: binary STL shorter than declared "
                        f"({len(raw)} < {expected} bytes)")
    body = np.frombuffer(raw, dtype=np.uint8, count=count * 50, offset=84)
    tris = body.reshape(count, 50)[:, :48].copy().view("<f4").reshape(count, 12)
    verts = tris[:, 3:12].reshape(count * 3, 3).astype(np.float64)
    faces = np.arange(count * 3).reshape(count, 3)
    return clean_mesh(verts, faces)


def _load_stl_ascii(text: str, path: Path) -> TriMesh:
    verts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if parts[:1] == ["vertex"]:
            if len(parts) != 4:
                raise MeshError(f"{path}:{lineno}: malformed vertex line")
            verts.append([float(p) for p in parts[1:4]])
    if not verts or len(verts) % 3:
        raise MeshError(f"{path}: ASCII STL vertex count not a multiple of 3")
    verts = np.array(verts)
    faces = np.arange(len(verts)).reshape(-1, 3)
    return clean_mesh(verts, faces)


def save_stl(mesh: TriMesh, path: str | Path) -> None:
    """Write binary STL: 80-byte header, little-endian float32 triples."""
    path = Path(path)
    tri = mesh.triangles
    v0 = mesh.vertices[tri[:, 0]]
    v1 = mesh.vertices[tri[:, 1]]
    v2 = mesh.vertices[tri[:, 2]]
    normals = np.cross(v1 - v0, v2 - v0)
    norm = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = np.divide(normals, norm, out=np.zeros_like(normals),
                        where=norm > 0)
    record = np.zeros((len(tri), 50), dtype=np.uint8)
    packed = np.concatenate(
        [normals, v0, v1, v2], axis=1).astype("<f4").view(np.uint8)
    record[:, :48] = packed.reshape(len(tri), 48)
    header = b"fluxlab binary stl (mm)".ljust(80, b"\0")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<I", len(tri)))
        fh.write(record.tobytes())


def save_obj(mesh: TriMesh, path: str | Path) -> None:
    """Write OBJ; vertex colors (if present) use the common 6-float extension."""
    with open(path, "w") as fh:
        if mesh.colors is not None:
            for v, c in zip(mesh.vertices, mesh.colors):
                fh.write(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f} "
                         f"{c[0]:.4f} {c[1]:.4f} {c[2]:.4f}\n")
        else:
            for v in mesh.vertices:
                fh.write(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def mesh_volume(mesh: TriMesh) -> float:
    """Signed divergence-theorem volume; positive for outward orientation.

    Raises NotWatertightError on open meshes.  An inverted (inward facing)
    mesh yields a negative value, which callers should treat as a flag.
    """
    if not mesh.watertight:
        raise NotWatertightError("volume requires a watertight mesh")
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    v1 = mesh.vertices[mesh.triangles[:, 1]]
    v2 = mesh.vertices[mesh.triangles[:, 2]]
    return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)


def surface_area(mesh: TriMesh) -> float:
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    v1 = mesh.vertices[mesh.triangles[:, 1]]
    v2 = mesh.vertices[mesh.triangles[:, 2]]
    return float(0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1).sum())
