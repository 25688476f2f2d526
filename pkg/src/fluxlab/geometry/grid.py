"""Uniform scalar grids (signed distance fields) and CSG on them.

Sign convention: negative inside solid material.  Union of interiors is the
pointwise minimum, intersection the maximum, subtraction max(a, -b).  All
composition in the pipeline happens on these grids, never on meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Plane:
    """Oriented plane from a point and a unit normal."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=np.float64).reshape(3)
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        length = np.linalg.norm(n)
        if length < 1e-12:
            raise ValueError("plane normal must be nonzero")
        n = n / length
        p.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Positive on the side the normal points into."""
        points = np.asarray(points, dtype=np.float64)
        return (points - self.point) @ self.normal

    def flipped(self) -> "Plane":
        return Plane(self.point, -self.normal)


@dataclass(frozen=True)
class ScalarGrid:
    """Scalar samples on a uniform axis-aligned grid.

    origin is the coordinate of sample (0,0,0); samples are spaced
    `spacing` mm apart along each axis; values has shape `dims`.
    """

    origin: np.ndarray
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise ValueError("values must be a 3d array")
        if min(values.shape) < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        origin.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    @property
    def max_corner(self) -> np.ndarray:
        return self.origin + (np.array(self.dims) - 1) * self.spacing

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(self.origin[i] + self.spacing * np.arange(self.dims[i])
                     for i in range(3))

    def points(self) -> np.ndarray:
        """All sample coordinates, shape (*dims, 3).  Large: use sparingly."""
        ax = self.axes()
        X, Y, Z = np.meshgrid(*ax, indexing="ij")
        return np.stack([X, Y, Z], axis=-1)

    def with_values(self, values: np.ndarray) -> "ScalarGrid":
        return ScalarGrid(self.origin, self.spacing, values)

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Trilinear interpolation; points outside clamp to the boundary."""
        points = np.asarray(points, dtype=np.float64)
        squeeze = points.ndim == 1
        pts = np.atleast_2d(points)
        f = (pts - self.origin) / self.spacing
        dims = np.array(self.dims)
        f = np.clip(f, 0.0, dims - 1.000001)
        i0 = np.floor(f).astype(np.int64)
        i0 = np.minimum(i0, dims - 2)
        t = f - i0
        v = self.values
        x0, y0, z0 = i0[:, 0], i0[:, 1], i0[:, 2]
        tx, ty, tz = t[:, 0], t[:, 1], t[:, 2]
        c = (v[x0, y0, z0] * (1 - tx) * (1 - ty) * (1 - tz)
             + v[x0 + 1, y0, z0] * tx * (1 - ty) * (1 - tz)
             + v[x0, y0 + 1, z0] * (1 - tx) * ty * (1 - tz)
             + v[x0, y0, z0 + 1] * (1 - tx) * (1 - ty) * tz
             + v[x0 + 1, y0 + 1, z0] * tx * ty * (1 - tz)
             + v[x0 + 1, y0, z0 + 1] * tx * (1 - ty) * tz
             + v[x0, y0 + 1, z0 + 1] * (1 - tx) * ty * tz
             + v[x0 + 1, y0 + 1, z0 + 1] * tx * ty * tz)
        return float(c[0]) if squeeze else c

    def solid_volume(self, level: float = 0.0) -> float:
        """Volume estimate: count of samples below `level` times voxel volume."""
        return float((self.values < level).sum()) * self.spacing ** 3


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, ScalarGrid) else np.asarray(g)


def sdf_union(first, *rest):
    """Pointwise min: union of interiors (negative = inside)."""
    out = _values(first).copy()
    for g in rest:
        np.minimum(out, _values(g), out=out)
    if isinstance(first, ScalarGrid):
        return first.with_values(out)
    return out


def sdf_intersect(first, *rest):
    """Pointwise max: intersection of interiors."""
    out = _values(first).copy()
    for g in rest:
        np.maximum(out, _values(g), out=out)
    if isinstance(first, ScalarGrid):
        return first.with_values(out)
    return out


def sdf_subtract(a, b):
    """Interior of a minus interior of b: max(a, -b)."""
    out = np.maximum(_values(a), -_values(b))
    if isinstance(a, ScalarGrid):
        return a.with_values(out)
    return out
