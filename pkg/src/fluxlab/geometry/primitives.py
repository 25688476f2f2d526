"""Programmatic mesh fixtures: box, cylinder, icosphere, torus, cone."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh, clean_mesh


def box(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriMesh:
    s = np.asarray(size, dtype=np.float64) / 2
    c = np.asarray(center, dtype=np.float64)
    corners = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1)
                        for z in (-1, 1)], dtype=np.float64)
    verts = corners * s + c
    faces = np.array([
        [0, 1, 3], [0, 3, 2],  # x-
        [4, 6, 7], [4, 7, 5],  # x+
        [0, 4, 5], [0, 5, 1],  # y-
        [2, 3, 7], [2, 7, 6],  # y+
        [0, 2, 6], [0, 6, 4],  # z-
        [1, 5, 7], [1, 7, 3],  # z+
    ])
    return TriMesh(verts, faces)


def cylinder(radius: float, height: float, center=(0.0, 0.0, 0.0),
             segments: int = 96) -> TriMesh:
    """Closed cylinder along z, centered at `center`."""
    c = np.asarray(center, dtype=np.float64)
    ang = np.linspace(0, 2 * np.pi, segments, endpoint=False)
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    lo = np.concatenate([ring, np.full((segments, 1), -height / 2)], axis=1)
    hi = np.concatenate([ring, np.full((segments, 1), height / 2)], axis=1)
    verts = [lo, hi, [[0.0, 0.0, -height / 2]], [[0.0, 0.0, height / 2]]]
    verts = np.concatenate(verts) + c
    bot_c, top_c = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces.append([i, j, segments + i])
        faces.append([j, segments + j, segments + i])
        faces.append([bot_c, j, i])
        faces.append([top_c, segments + i, segments + j])
    return TriMesh(verts, np.asarray(faces))


def cone(r_bottom: float, r_top: float, height: float,
         center=(0.0, 0.0, 0.0), segments: int = 96) -> TriMesh:
    """Truncated cone (tapered cylinder) along z."""
    c = np.asarray(center, dtype=np.float64)
    ang = np.linspace(0, 2 * np.pi, segments, endpoint=False)
    unit = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    lo = np.concatenate([unit * r_bottom,
                         np.full((segments, 1), -height / 2)], axis=1)
    hi = np.concatenate([unit * r_top,
                         np.full((segments, 1), height / 2)], axis=1)
    verts = np.concatenate([lo, hi, [[0, 0, -height / 2]],
                            [[0, 0, height / 2]]]) + c
    bot_c, top_c = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces.append([i, j, segments + i])
        faces.append([j, segments + j, segments + i])
        faces.append([bot_c, j, i])
        faces.append([top_c, segments + i, segments + j])
    return TriMesh(verts, np.asarray(faces))


def icosphere(radius: float, subdivisions: int = 3,
              center=(0.0, 0.0, 0.0)) -> TriMesh:
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    for _ in range(subdivisions):
        midcache: dict[tuple[int, int], int] = {}
        new_faces = []
        verts = list(verts)

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midcache:
                verts.append((np.asarray(verts[a]) + np.asarray(verts[b])) / 2)
                midcache[key] = len(verts) - 1
            return midcache[key]

        for f in faces:
            ab = midpoint(f[0], f[1])
            bc = midpoint(f[1], f[2])
            ca = midpoint(f[2], f[0])
            new_faces += [[f[0], ab, ca], [f[1], bc, ab],
                          [f[2], ca, bc], [ab, bc, ca]]
        faces = np.asarray(new_faces)
        verts = np.asarray(verts)
    verts = verts / np.linalg.norm(verts, axis=1, keepdims=True) * radius
    return clean_mesh(verts + np.asarray(center, dtype=np.float64), faces)


def torus(r_major: float, r_minor: float, center=(0.0, 0.0, 0.0),
          n_major: int = 64, n_minor: int = 32) -> TriMesh:
    """Torus around the z axis."""
    c = np.asarray(center, dtype=np.float64)
    U = np.arange(n_major) * 2 * np.pi / n_major
    V = np.arange(n_minor) * 2 * np.pi / n_minor
    UU, VV = np.meshgrid(U, V, indexing="ij")
    x = (r_major + r_minor * np.cos(VV)) * np.cos(UU)
    y = (r_major + r_minor * np.cos(VV)) * np.sin(UU)
    z = r_minor * np.sin(VV)
    verts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1) + c
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            a1 = i * n_minor + (j + 1) % n_minor
            b1 = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            faces.append([a, b, a1])
            faces.append([b, b1, a1])
    return TriMesh(verts, np.asarray(faces))
