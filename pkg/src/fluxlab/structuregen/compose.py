"""FluxIO composition: body + lattice + shell + anchors - cavity, split in two.

All booleans happen on the shared scalar grid.  Outside the selected segment
the body stays solid; inside it the gyroid padding (clipped to the body
interior) is unioned with the surface cable shell and any anchors, then the
channel cavity with its end sockets is subtracted.  The result splits at the
split plane into the main part and a separately printed bottom part.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ..geometry.grid import Plane, ScalarGrid
from ..geometry.mesh import TriMesh
from ..geometry.sdf import mesh_to_sdf, extract_isosurface
from .anchor import AnchorSpec, generate_anchor
from .channel import (ChannelPath, SegmentSelection, compute_channel_axis,
                      DEFAULT_CHANNEL_RADIUS)
from .lattice import GyroidSpec, lattice_sdf, cell_size_for_solidity, \
    elasticity_to_solidity
from .shell import HelixShellSpec, HelixShell, generate_helix_shell

MAX_SEGMENT_DIAMETER = 60.0  # mm, actuation limit of the embedded spring
CHANNEL_SLEEVE = 1.0  # mm solid tube printed around the cavity
CHANNEL_CLEARANCE = 1.0  # mm the sleeve must stay inside the surface
SPLIT_OFFSET = 10.0  # mm from the lower channel end to the split plane


class CompositionError(ValueError):
    pass


@dataclass(frozen=True)
class SocketSpec:
    """Hemispherical hook pockets that retain the crimped spring ends."""

    pocket_radius: float = 2.5  # mm, hemisphere the crimp snaps into
    seat_radius: float = 1.2  # mm bore for the crimp/wire pass-through
    seat_length: float = 8.0  # mm of bore beyond the pocket center
    pocket_inset: float = 2.5  # mm beyond the channel end to the pocket center


@dataclass(frozen=True)
class FluxIOModel:
    """Complete parameterized design for one shape-changing segment."""

    mesh: TriMesh
    selection: SegmentSelection
    channel: ChannelPath
    gyroid: GyroidSpec
    shell: HelixShellSpec = HelixShellSpec()
    anchors: tuple[AnchorSpec, ...] = ()
    socket: SocketSpec = SocketSpec()
    split_plane: Plane | None = None
    target_solidity: float | None = None

    def split(self) -> Plane:
        if self.split_plane is not None:
            return self.split_plane
        d = self.channel.direction()
        return Plane(self.channel.start + SPLIT_OFFSET * d, d)

    def to_params(self) -> dict:
        """JSON-serializable parameter record (versioned schema)."""
        sel = self.selection
        return {
            "schema_version": 1,
            "selection": {
                "plane_a": {"point": sel.plane_a.point.tolist(),
                            "normal": sel.plane_a.normal.tolist()},
                "plane_b": {"point": sel.plane_b.point.tolist(),
                            "normal": sel.plane_b.normal.tolist()},
            },
            "channel": {"samples": self.channel.samples.tolist(),
                        "radius": self.channel.radius},
            "gyroid": {"cell_size": self.gyroid.cell_size,
                       "wall": self.gyroid.wall},
            "shell": {"spacing": self.shell.spacing,
                      "wire_diameter": self.shell.wire_diameter,
                      "slope_deg": self.shell.slope_deg},
            "anchors": [{"azimuth_deg": a.azimuth_deg, "width": a.width,
                         "thickness": a.thickness} for a in self.anchors],
            "socket": {"pocket_radius": self.socket.pocket_radius,
                       "seat_radius": self.socket.seat_radius,
                       "seat_length": self.socket.seat_length,
                       "pocket_inset": self.socket.pocket_inset},
            "split_plane": {"point": self.split().point.tolist(),
                            "normal": self.split().normal.tolist()},
            "target_solidity": self.target_solidity,
        }


@dataclass(frozen=True)
class Composition:
    """Composed solid plus the intermediate fields used to measure it."""

    model: FluxIOModel
    grid: ScalarGrid  # final composite SDF (before the split)
    body: ScalarGrid
    lattice: np.ndarray  # raw lattice SDF values on the grid
    shell: HelixShell
    anchor_values: np.ndarray | None
    sleeve: np.ndarray  # channel sleeve solid SDF values
    cavity: np.ndarray  # channel + sockets SDF values
    main: TriMesh
    bottom: TriMesh
    warnings: tuple[str, ...] = ()


def build_fluxio_model(mesh: TriMesh, selection: SegmentSelection,
                       elasticity: float = 0.5,
                       behavior: str = "compression",
                       bend_azimuth_deg: float = 0.0,
                       anchor_width: float = 8.0,
                       n_slices: int = 25,
                       channel_radius: float = DEFAULT_CHANNEL_RADIUS,
                       solidity: float | None = None) -> FluxIOModel:
    """Standard model constructor used by the CLI and the service.

    Bending places one anchor opposite the requested bend direction, since
    the segment bends away from the stiff side.
    """
    if behavior not in ("compression", "bending"):
        raise ValueError(f"unknown behavior {behavior!r}")
    target = elasticity_to_solidity(elasticity) if solidity is None \
        else float(solidity)
    spec = GyroidSpec(cell_size_for_solidity(target))
    path = compute_channel_axis(mesh, selection, n_slices=n_slices,
                                radius=channel_radius)
    anchors: tuple[AnchorSpec, ...] = ()
    if behavior == "bending":
        anchors = (AnchorSpec(azimuth_deg=(bend_azimuth_deg + 180.0) % 360.0,
                              width=anchor_width),)
    return FluxIOModel(mesh=mesh, selection=selection, channel=path,
                       gyroid=spec, anchors=anchors, target_solidity=target)


def _cavity_sdf(points: np.ndarray, model: FluxIOModel) -> np.ndarray:
    """Channel tube plus hook pockets and seat bores at both ends."""
    path = model.channel
    sk = model.socket
    vals = path.sdf(points)
    d = path.direction()
    for endpoint, outward in ((path.start, -d), (path.end, d)):
        center = endpoint + sk.pocket_inset * outward
        pocket = np.linalg.norm(points - center, axis=-1) - sk.pocket_radius
        seat_end = center + sk.seat_length * outward
        seg = seat_end - center
        t = np.clip(((points - center) @ seg) / (seg @ seg), 0.0, 1.0)
        seat = np.linalg.norm(points - (center + t[:, None] * seg),
                              axis=-1) - sk.seat_radius
        vals = np.minimum.reduce([vals, pocket, seat])
    return vals


def compose_grid(model: FluxIOModel, voxel: float = 0.5) -> Composition:
    """Evaluate the full composite on a grid; meshes are extracted lazily
    by compose_fluxio."""
    notes: list[str] = []
    body = mesh_to_sdf(model.mesh, voxel,
                       pad_mm=model.shell.wire_diameter / 2 + 1.0)
    pts = body.points().reshape(-1, 3)
    b = body.values.ravel()
    slab = model.selection.slab_sdf(pts)

    # guard rails from the fabrication envelope:
    # the body surface must stay clear of the sleeve around the cavity
    clear = model.channel.radius + CHANNEL_SLEEVE + CHANNEL_CLEARANCE
    surf_in_slab = model.mesh.vertices[
        model.selection.slab_sdf(model.mesh.vertices) < 0]
    if len(surf_in_slab):
        min_clear = model.channel.distance(surf_in_slab).min()
        if min_clear < clear:
            raise CompositionError(
                f"channel within {min_clear:.2f} mm of the surface; needs "
                f">= {clear:.2f} mm (cavity radius + sleeve + clearance)")
    shell = generate_helix_shell(body, model.channel, model.selection,
                                 model.shell)
    if 2 * shell.mean_radius > MAX_SEGMENT_DIAMETER:
        notes.append(
            f"segment diameter {2 * shell.mean_radius:.1f} mm exceeds the "
            f"{MAX_SEGMENT_DIAMETER:.0f} mm actuation limit; the spring will "
            f"only deform the core region")
        warnings.warn(notes[-1], stacklevel=2)

    lattice = lattice_sdf(pts, model.gyroid)
    inside_segment = np.maximum.reduce([lattice, b, slab])

    anchor_vals = None
    for spec in model.anchors:
        a = generate_anchor(body, model.channel, model.selection, spec,
                            shell.mean_radius).values.ravel()
        anchor_vals = a if anchor_vals is None else np.minimum(anchor_vals, a)

    # solid sleeve around the cavity: the channel needs a printed wall
    # through the porous lattice so the spring can slide in
    chan_dist = model.channel.distance(pts)
    sleeve = np.maximum.reduce([
        chan_dist - (model.channel.radius + CHANNEL_SLEEVE),
        model.channel.radius - chan_dist, slab])

    segment_solid = np.minimum.reduce([inside_segment,
                                       shell.grid.values.ravel(), sleeve])
    if anchor_vals is not None:
        segment_solid = np.minimum(segment_solid, anchor_vals)
    outside = np.maximum(b, -slab)
    solid = np.minimum(outside, segment_solid)

    cavity = _cavity_sdf(pts, model)
    final = np.maximum(solid, -cavity)

    grid = body.with_values(final.reshape(body.dims))
    return Composition(model=model, grid=grid, body=body, lattice=lattice,
                       shell=shell, anchor_values=anchor_vals, sleeve=sleeve,
                       cavity=cavity, main=None, bottom=None,
                       warnings=tuple(notes))


def compose_fluxio(model: FluxIOModel, voxel: float = 0.5) -> Composition:
    """Compose and extract the printable main and bottom meshes."""
    comp = compose_grid(model, voxel)
    split = model.split()
    pts = comp.grid.points().reshape(-1, 3)
    dist = split.signed_distance(pts).reshape(comp.grid.dims)
    main_vals = np.maximum(comp.grid.values, -dist)
    bottom_vals = np.maximum(comp.grid.values, dist)
    main = extract_isosurface(comp.grid.with_values(main_vals))
    bottom = extract_isosurface(comp.grid.with_values(bottom_vals))
    for name, m in (("main", main), ("bottom", bottom)):
        if not m.watertight:
            raise CompositionError(f"{name} part is not watertight")
    return replace(comp, main=main, bottom=bottom)


def measure_channel_diameter(comp: Composition, n_stations: int = 12,
                             n_azimuths: int = 8) -> np.ndarray:
    """Cavity diameters sampled along the channel path (independent check).

    Marches from path points (inside the cavity, composite positive) to the
    first solid crossing on opposite ray pairs.
    """
    path = comp.model.channel
    t, u, v = path.frames()
    cum = np.concatenate([[0], np.cumsum(
        np.linalg.norm(np.diff(path.samples, axis=0), axis=1))])
    grid = comp.grid
    diameters = []
    stations = np.linspace(0.15, 0.85, n_stations) * path.length
    for s in stations:
        p = path.point_at(s)
        i = min(int(np.searchsorted(cum, s, side="right")) - 1,
                len(path.samples) - 1)
        for a in np.linspace(0, np.pi, n_azimuths, endpoint=False):
            d = np.cos(a) * u[i] + np.sin(a) * v[i]
            r1 = _march_to_solid(grid, p, d)
            r2 = _march_to_solid(grid, p, -d)
            if r1 is not None and r2 is not None:
                diameters.append(r1 + r2)
    return np.asarray(diameters)


def _march_to_solid(grid: ScalarGrid, origin: np.ndarray, direction: np.ndarray,
                    t_max: float = 40.0) -> float | None:
    step = grid.spacing / 2
    t = step
    prev = 0.0
    while t <= t_max:
        if grid.sample(origin + t * direction) <= 0:
            lo, hi = prev, t
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if grid.sample(origin + mid * direction) <= 0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = t
        t += step
    return None


def measure_lattice_solidity(comp: Composition) -> float:
    """Voxel-fraction solidity of the lattice region inside the segment.

    Counts lattice-solid samples over samples in the measurement region:
    body interior within the slab, excluding shell, anchors and cavity.
    """
    b = comp.body.values.ravel()
    slab = comp.model.selection.slab_sdf(
        comp.body.points().reshape(-1, 3))
    region = (b < 0) & (slab < 0)
    region &= comp.shell.grid.values.ravel() > 0
    region &= comp.cavity > 0
    region &= comp.sleeve > 0
    if comp.anchor_values is not None:
        region &= comp.anchor_values > 0
    if not region.any():
        raise CompositionError("empty lattice measurement region")
    return float((comp.lattice.ravel()[region] < 0).mean())
