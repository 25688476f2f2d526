"""Parallel helix surface wireframe.

A family of helices winds around the channel axis at 45 degrees local climb
angle and is projected radially onto the body surface, then swept as 1.8 mm
tubes.  The number of parallel starts keeps the axial distance between
adjacent cables at the configured 8 mm spacing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..geometry.grid import ScalarGrid
from .channel import ChannelPath, SegmentSelection


@dataclass(frozen=True)
class HelixShellSpec:
    spacing: float = 8.0  # mm between adjacent cables along the axis
    wire_diameter: float = 1.8  # mm
    slope_deg: float = 45.0  # local climb angle of each cable

    def __post_init__(self):
        if min(self.spacing, self.wire_diameter) <= 0:
            raise ValueError("spacing and wire diameter must be positive")
        if not 0 < self.slope_deg < 90:
            raise ValueError("slope must be in (0, 90) degrees")


@dataclass(frozen=True)
class HelixShell:
    grid: ScalarGrid  # tube solid SDF, clipped to the segment slab
    pitch: float  # mm, axial advance of one cable per turn
    starts: int  # number of parallel cables
    mean_radius: float  # mm, radial distance of the surface from the axis
    curves: list  # per-cable (k, 3) sample points (for preview/export)


def _radial_surface_hits(body: ScalarGrid, origins: np.ndarray,
                         dirs: np.ndarray, t_max: float) -> np.ndarray:
    """Distance along each ray to the body surface (sdf zero crossing).

    Marches outward then bisects; NaN where the ray never leaves the body.
    """
    n = len(origins)
    t_lo = np.zeros(n)
    t_hi = np.full(n, np.nan)
    step = max(1.0, body.spacing)
    t = np.full(n, step)
    alive = np.ones(n, dtype=bool)
    while alive.any() and t[alive].min() < t_max:
        pts = origins[alive] + t[alive, None] * dirs[alive]
        outside = body.sample(pts) > 0
        idx = np.nonzero(alive)[0]
        hit = idx[outside]
        t_hi[hit] = t[hit]
        alive[hit] = False
        t_lo[idx[~outside]] = t[idx[~outside]]
        t[alive] += step
    found = ~np.isnan(t_hi)
    lo, hi = t_lo[found], t_hi[found]
    o, d = origins[found], dirs[found]
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        inside = body.sample(o + mid[:, None] * d) <= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    out = np.full(n, np.nan)
    out[found] = 0.5 * (lo + hi)
    return out


def surface_mean_radius(body: ScalarGrid, path: ChannelPath,
                        n_stations: int = 9, n_azimuths: int = 16) -> float:
    """Mean radial distance from the channel axis to the body surface."""
    t, u, v = path.frames()
    length = path.length
    stations = np.linspace(0.1, 0.9, n_stations) * length
    seg = np.searchsorted(
        np.concatenate([[0], np.cumsum(
            np.linalg.norm(np.diff(path.samples, axis=0), axis=1))]),
        stations, side="right") - 1
    seg = np.clip(seg, 0, len(path.samples) - 1)
    origins, dirs = [], []
    for s, i in zip(stations, seg):
        p = path.point_at(s)
        for a in np.linspace(0, 2 * np.pi, n_azimuths, endpoint=False):
            origins.append(p)
            dirs.append(np.cos(a) * u[i] + np.sin(a) * v[i])
    t_max = float(np.linalg.norm(body.max_corner - body.origin))
    hits = _radial_surface_hits(body, np.asarray(origins), np.asarray(dirs),
                                t_max)
    hits = hits[~np.isnan(hits)]
    if len(hits) == 0:
        raise ValueError("no radial ray reached the surface")
    return float(hits.mean())


def generate_helix_shell(body: ScalarGrid, path: ChannelPath,
                         selection: SegmentSelection,
                         spec: HelixShellSpec = HelixShellSpec(),
                         sample_step: float = 0.25) -> HelixShell:
    """Build the surface cable wireframe as a solid SDF on the body grid."""
    mean_r = surface_mean_radius(body, path)
    # 45 degree climb on a circle of radius r advances one circumference
    # per turn; other slopes scale by tan(slope).
    pitch = 2.0 * np.pi * mean_r * np.tan(np.radians(spec.slope_deg))
    starts = max(1, round(pitch / spec.spacing))
    length = path.length
    # the multi-start family repeats axially every pitch/starts = spacing;
    # a segment shorter than that cannot even fit two adjacent cables
    if length < spec.spacing:
        warnings.warn(
            f"segment length {length:.1f} mm is shorter than the "
            f"{spec.spacing:.1f} mm cable spacing; emitting a single "
            f"partial cable", stacklevel=2)
        starts = 1

    t, u, v = path.frames()
    cum = np.concatenate([[0], np.cumsum(
        np.linalg.norm(np.diff(path.samples, axis=0), axis=1))])
    s_vals = np.arange(0.0, length + sample_step, sample_step)
    s_vals = np.clip(s_vals, 0, length)
    seg_idx = np.clip(np.searchsorted(cum, s_vals, side="right") - 1,
                      0, len(path.samples) - 1)
    stations = np.asarray([path.point_at(s) for s in s_vals])
    theta_base = 2.0 * np.pi * s_vals / pitch

    origins, dirs = [], []
    for k in range(starts):
        phase = 2.0 * np.pi * k / starts
        ang = theta_base + phase
        d = (np.cos(ang)[:, None] * u[seg_idx]
             + np.sin(ang)[:, None] * v[seg_idx])
        origins.append(stations)
        dirs.append(d)
    origins = np.concatenate(origins)
    dirs = np.concatenate(dirs)
    t_max = float(np.linalg.norm(body.max_corner - body.origin))
    hits = _radial_surface_hits(body, origins, dirs, t_max)
    ok = ~np.isnan(hits)
    pts = origins[ok] + hits[ok, None] * dirs[ok]
    per = ok.sum() // starts if starts else 0
    curves = [pts[i * per:(i + 1) * per] for i in range(starts)] \
        if per else [pts]

    tree = cKDTree(pts)
    grid_pts = body.points().reshape(-1, 3)
    dist, _ = tree.query(grid_pts, workers=-1)
    tube = dist - spec.wire_diameter / 2.0
    tube = np.maximum(tube, selection.slab_sdf(grid_pts))
    return HelixShell(body.with_values(tube.reshape(body.dims)),
                      float(pitch), int(starts), mean_r, curves)
