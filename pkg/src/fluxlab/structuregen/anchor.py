"""Anchor strips: solid surface regions that steer compression into bending.

An anchor preserves a continuous band of solid material at a given azimuth
around the channel axis, spanning the full segment.  Width is the arc width
on the surface; widths beyond half the local circumference would suppress
bending entirely and are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry.grid import ScalarGrid
from .channel import ChannelPath, SegmentSelection

DEFAULT_ANCHOR_THICKNESS = 2.0  # mm; width, not thickness, drives bending


class AnchorError(ValueError):
    pass


@dataclass(frozen=True)
class AnchorSpec:
    azimuth_deg: float  # around the channel axis, in the path (u, v) frame
    width: float  # mm of arc on the surface
    thickness: float = DEFAULT_ANCHOR_THICKNESS

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("anchor width must be positive")
        if not self.thickness > 0:
            raise ValueError("anchor thickness must be positive")


def generate_anchor(body: ScalarGrid, path: ChannelPath,
                    selection: SegmentSelection, spec: AnchorSpec,
                    mean_radius: float) -> ScalarGrid:
    """Solid SDF of one anchor strip on the body grid.

    mean_radius is the segment's mean surface radius (from the shell step);
    it bounds the permissible width at half the local circumference.
    """
    if spec.width >= np.pi * mean_radius:
        raise AnchorError(
            f"anchor width {spec.width:.1f} mm exceeds half the local "
            f"circumference ({np.pi * mean_radius:.1f} mm); "
            f"bending would be suppressed")

    pts = body.points().reshape(-1, 3)
    t, u, v = path.frames()

    # azimuth of each grid point about the nearest axis station
    cum = np.concatenate([[0], np.cumsum(
        np.linalg.norm(np.diff(path.samples, axis=0), axis=1))])
    axis = path.direction()
    s = np.clip((pts - path.start) @ axis, 0, path.length)
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1,
                  0, len(path.samples) - 1)
    rel = pts - path.samples[idx]
    x = np.einsum("ij,ij->i", rel, u[idx])
    y = np.einsum("ij,ij->i", rel, v[idx])
    radial = np.hypot(x, y)
    phi = np.degrees(np.arctan2(y, x))
    delta = np.abs((phi - spec.azimuth_deg + 180.0) % 360.0 - 180.0)
    arc = np.radians(delta) * radial
    wedge = arc - spec.width / 2.0

    b = body.values.ravel()
    band = np.maximum(b, -(b + spec.thickness))  # within thickness of surface
    vals = np.maximum.reduce([band, wedge, selection.slab_sdf(pts)])
    return body.with_values(vals.reshape(body.dims))
