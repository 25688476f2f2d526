"""Planar cross-sections of watertight meshes.

Each section is returned as closed polygons with positive area and the area
centroid of each polygon, the measurement the channel-axis builder rests on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Plane
from .mesh import TriMesh, NotWatertightError


@dataclass(frozen=True)
class CrossSection:
    polygon: np.ndarray  # (k, 3) ordered loop vertices on the plane
    area: float  # mm^2, > 0
    centroid: np.ndarray  # (3,)


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0])
    if abs(normal @ helper) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def slice_section(mesh: TriMesh, plane: Plane) -> list[CrossSection]:
    """Intersect a watertight mesh with a plane.

    Returns one CrossSection per closed loop, largest area first; an empty
    list when the plane misses the mesh.
    """
    if not mesh.watertight:
        raise NotWatertightError("slicing requires a watertight mesh")
    dist = plane.signed_distance(mesh.vertices)
    # perturb exact-zero vertices; keeps every crossing a clean edge crossing
    eps = 1e-9 * max(1.0, float(np.abs(dist).max()))
    dist = np.where(np.abs(dist) < eps, eps, dist)

    tri = mesh.triangles
    d = dist[tri]  # (m, 3)
    side = d > 0
    crossing = ~(side.all(axis=1) | (~side).all(axis=1))
    if not crossing.any():
        return []

    segments = []
    for t in np.nonzero(crossing)[0]:
        pts = []
        for e0, e1 in ((0, 1), (1, 2), (2, 0)):
            a, b = tri[t, e0], tri[t, e1]
            da, db = dist[a], dist[b]
            if (da > 0) != (db > 0):
                w = da / (da - db)
                pts.append(mesh.vertices[a] + w * (mesh.vertices[b]
                                                   - mesh.vertices[a]))
        if len(pts) == 2:
            segments.append(pts)
    if not segments:
        return []
    segments = np.asarray(segments)  # (s, 2, 3)

    # chain segments into loops by quantized endpoint keys
    quant = 1e-7 * max(1.0, float(np.abs(segments).max()))
    keys = np.round(segments / quant).astype(np.int64)
    key_of = {}
    for si in range(len(segments)):
        for end in (0, 1):
            key_of.setdefault(tuple(keys[si, end]), []).append((si, end))

    used = np.zeros(len(segments), dtype=bool)
    loops = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        loop = [segments[start, 0], segments[start, 1]]
        loop_keys = [tuple(keys[start, 0]), tuple(keys[start, 1])]
        while True:
            tail = loop_keys[-1]
            nxt = None
            for si, end in key_of.get(tail, ()):
                if not used[si]:
                    nxt = (si, end)
                    break
            if nxt is None:
                break
            si, end = nxt
            used[si] = True
            loop.append(segments[si, 1 - end])
            loop_keys.append(tuple(keys[si, 1 - end]))
            if loop_keys[-1] == loop_keys[0]:
                loop.pop()
                loop_keys.pop()
                break
        if len(loop) >= 3:
            loops.append(np.asarray(loop))

    u, v = _plane_basis(plane.normal)
    sections = []
    for loop in loops:
        rel = loop - plane.point
        x = rel @ u
        y = rel @ v
        x1, y1 = np.roll(x, -1), np.roll(y, -1)
        cross = x * y1 - x1 * y
        area = 0.5 * cross.sum()
        if abs(area) < 1e-9:
            continue
        cx = ((x + x1) * cross).sum() / (6 * area)
        cy = ((y + y1) * cross).sum() / (6 * area)
        if area < 0:
            loop = loop[::-1]
            area = -area
        centroid = plane.point + cx * u + cy * v
        sections.append(CrossSection(loop, float(area), centroid))
    sections.sort(key=lambda s: s.area, reverse=True)
    return sections
