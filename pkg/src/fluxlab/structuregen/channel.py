"""Channel axis extraction: slice the selected segment, chain centroids.

The SMA channel follows an approximate medial axis obtained by slicing the
segment at evenly spaced stations, taking the largest cross-section's area
centroid at each station and smoothing the chain with a short moving
average.  Springs are straight: paths tighter than a 20 mm curvature radius
are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry.grid import Plane
from ..geometry.mesh import TriMesh
from ..geometry.slicing import slice_section

MIN_CURVATURE_RADIUS = 20.0  # mm, straight-spring insertion limit
DEFAULT_CHANNEL_RADIUS = 5.0  # mm (10 mm diameter cavity)
_BOUNDARY_INSET = 0.25  # mm, keep slicing off the exact selection planes


class ChannelError(ValueError):
    """Segment unusable for a channel (empty slice, too curved...)."""


@dataclass(frozen=True)
class SegmentSelection:
    """Two planes with normals facing each other; between them is converted."""

    plane_a: Plane
    plane_b: Plane

    def __post_init__(self):
        gap = self.plane_b.point - self.plane_a.point
        if self.plane_a.normal @ gap < 0 or self.plane_b.normal @ gap > 0:
            raise ValueError("selection plane normals must face each other")

    @property
    def axis(self) -> np.ndarray:
        """Unit direction from plane_a toward plane_b."""
        n = self.plane_a.normal - self.plane_b.normal
        return n / np.linalg.norm(n)

    @property
    def length(self) -> float:
        return float((self.plane_b.point - self.plane_a.point) @ self.axis)

    def slab_sdf(self, points: np.ndarray) -> np.ndarray:
        """Negative between the planes."""
        da = self.plane_a.signed_distance(points)
        db = self.plane_b.signed_distance(points)
        return np.maximum(-da, -db)


@dataclass(frozen=True)
class ChannelPath:
    """Smoothed centroid polyline with the cavity radius."""

    samples: np.ndarray  # (k, 3), ordered from plane_a to plane_b
    radius: float = DEFAULT_CHANNEL_RADIUS

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        if s.ndim != 2 or s.shape[1] != 3 or len(s) < 2:
            raise ValueError("channel path needs at least 2 samples")
        if np.any(np.linalg.norm(np.diff(s, axis=0), axis=1) <= 0):
            raise ValueError("consecutive path samples must be distinct")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.samples, axis=0),
                                    axis=1).sum())

    @property
    def start(self) -> np.ndarray:
        return self.samples[0]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    def direction(self) -> np.ndarray:
        d = self.samples[-1] - self.samples[0]
        return d / np.linalg.norm(d)

    def point_at(self, s: float) -> np.ndarray:
        """Point at arc length s from the start."""
        seg = np.diff(self.samples, axis=0)
        lengths = np.linalg.norm(seg, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        s = float(np.clip(s, 0.0, cum[-1]))
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(i, len(lengths) - 1)
        t = (s - cum[i]) / lengths[i]
        return self.samples[i] + t * seg[i]

    def frames(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-sample tangent and a rotation-minimizing (u, v) frame."""
        t = np.gradient(self.samples, axis=0)
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        u = np.zeros_like(t)
        helper = np.array([1.0, 0.0, 0.0])
        if abs(t[0] @ helper) > 0.9:
            helper = np.array([0.0, 1.0, 0.0])
        u0 = helper - (helper @ t[0]) * t[0]
        u[0] = u0 / np.linalg.norm(u0)
        for i in range(1, len(t)):
            proj = u[i - 1] - (u[i - 1] @ t[i]) * t[i]
            u[i] = proj / np.linalg.norm(proj)
        v = np.cross(t, u)
        return t, u, v

    def distance(self, points: np.ndarray, chunk: int = 200_000) -> np.ndarray:
        """Min distance from each point to the polyline (vectorized)."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        a = self.samples[:-1]
        d = self.samples[1:] - a
        dd = (d * d).sum(axis=1)
        out = np.empty(len(points))
        for s0 in range(0, len(points), chunk):
            p = points[s0:s0 + chunk]
            best = np.full(len(p), np.inf)
            for j in range(len(a)):
                w = p - a[j]
                t = np.clip((w @ d[j]) / dd[j], 0.0, 1.0)
                diff = w - t[:, None] * d[j]
                np.minimum(best, np.einsum("ij,ij->i", diff, diff), out=best)
            out[s0:s0 + chunk] = np.sqrt(best)
        return out

    def sdf(self, points: np.ndarray) -> np.ndarray:
        """Signed distance of the cylindrical cavity around the path."""
        return self.distance(points) - self.radius


def _moving_average(points: np.ndarray, window: int = 3) -> np.ndarray:
    kernel = np.ones(window)
    counts = np.convolve(np.ones(len(points)), kernel, mode="same")
    smoothed = np.stack([np.convolve(points[:, i], kernel, mode="same")
                         / counts for i in range(3)], axis=1)
    return smoothed


def _min_circumradius(points: np.ndarray) -> float:
    """Smallest circumradius over consecutive point triples (inf if straight)."""
    r_min = np.inf
    for i in range(len(points) - 2):
        p0, p1, p2 = points[i], points[i + 1], points[i + 2]
        a = np.linalg.norm(p1 - p0)
        b = np.linalg.norm(p2 - p1)
        c = np.linalg.norm(p2 - p0)
        area2 = np.linalg.norm(np.cross(p1 - p0, p2 - p0))
        if area2 < 1e-9 * a * b:
            continue
        r_min = min(r_min, a * b * c / (2.0 * area2))
    return r_min


def compute_channel_axis(mesh: TriMesh, selection: SegmentSelection,
                         n_slices: int = 25,
                         radius: float = DEFAULT_CHANNEL_RADIUS) -> ChannelPath:
    """Medial-axis estimate of the selected segment.

    Raises ChannelError if any station produces an empty section or the
    smoothed path bends tighter than MIN_CURVATURE_RADIUS.
    """
    if n_slices < 5:
        raise ValueError("need at least 5 slices")
    axis = selection.axis
    length = selection.length
    if length <= 2 * _BOUNDARY_INSET:
        raise ChannelError("selection slab is empty or too thin")
    stations = np.linspace(_BOUNDARY_INSET, length - _BOUNDARY_INSET, n_slices)
    centroids = []
    for s in stations:
        plane = Plane(selection.plane_a.point + s * axis, axis)
        sections = slice_section(mesh, plane)
        if not sections:
            raise ChannelError(f"empty cross-section at station {s:.2f} mm")
        centroids.append(sections[0].centroid)  # largest area first
    smoothed = _moving_average(np.asarray(centroids), window=3)
    r = _min_circumradius(smoothed)
    if r < MIN_CURVATURE_RADIUS:
        raise ChannelError(
            f"channel curvature radius {r:.1f} mm is below the "
            f"{MIN_CURVATURE_RADIUS:.0f} mm straight-spring limit")
    return ChannelPath(smoothed, radius)
