"""Actuation preview: SMA contraction applied to the composed structure.

The spring pulls the end caps together along the channel axis, so the load
enters through the nodes around the channel footprint, not across the whole
cap; the offset between that line of action and the structure's stiffness
centroid is what turns anchored compression into bending.  Spring and
structure act as springs in series: the free recovery stroke splits between
them by their rates.  The model is linear, so a single unit-force solve is
scaled to the actual force and across the animation frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry.grid import ScalarGrid
from ..structuregen.compose import Composition, CHANNEL_SLEEVE
from .hexmesh import VoxelModel, voxelize
from .sma import SmaSpringParams
from .solver import (BoundaryConditions, DisplacementField, MaterialParams,
                     StaticSolver, StrainField, element_strains)


@dataclass(frozen=True)
class ActuationFrame:
    phase: float
    displacement: DisplacementField
    strain: StrainField
    axial_compression: float  # mm, mean axial approach of the loaded cap
    lateral_tip: float  # mm, mean lateral motion of the loaded cap
    bend_angle_deg: float  # angle between end-cap normals
    bend_azimuth_deg: float  # direction of lateral tip motion


@dataclass(frozen=True)
class ActuationResult:
    mode: str
    frames: list  # [ActuationFrame]
    structure_rate: float  # N/mm seen by the spring
    spring_rate: float  # N/mm
    applied_force: float  # N at phase = 1
    voxels: VoxelModel


def _cap_normal(nodes: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Unit normal of the least-squares plane through deformed cap nodes."""
    pts = nodes + u
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    n = vt[-1]
    return n if n[2] >= 0 else -n


def _load_nodes(vox: VoxelModel, cap: np.ndarray,
                center_xy: np.ndarray, radius: float) -> np.ndarray:
    """Cap nodes within the channel footprint; whole cap as a fallback."""
    xy = vox.nodes[cap][:, :2]
    near = np.linalg.norm(xy - center_xy, axis=1) <= radius
    return cap[near] if near.any() else cap


def simulate_actuation(comp: Composition | ScalarGrid,
                       mode: str = "compression",
                       phases=(0.25, 0.5, 0.75, 1.0),
                       mat: MaterialParams = MaterialParams(),
                       sma: SmaSpringParams = SmaSpringParams(),
                       fe_voxel: float = 1.0,
                       occupancy_bias: float = 0.0) -> ActuationResult:
    """Per-phase deformation frames of a composed model (or a bare solid
    grid, used for solver sanity fixtures)."""
    if mode not in ("compression", "bending"):
        raise ValueError(f"unknown actuation mode {mode!r}")
    phases = [float(p) for p in phases]
    if any(not 0.0 <= p <= 1.0 for p in phases):
        raise ValueError("phases must lie in [0, 1]")

    if isinstance(comp, Composition):
        grid = comp.grid
        footprint = comp.model.channel.radius + CHANNEL_SLEEVE + fe_voxel
        top_xy = comp.model.channel.end[:2]
    else:
        grid = comp
        footprint = np.inf
        top_xy = None

    vox = voxelize(grid, fe_voxel, occupancy_bias)
    bottom = vox.cap_nodes("bottom")
    top = vox.cap_nodes("top")
    if top_xy is None:
        top_xy = vox.nodes[top][:, :2].mean(axis=0)
    loaded = _load_nodes(vox, top, top_xy, footprint)

    solver = StaticSolver(vox, mat)
    bc = BoundaryConditions(fixed_nodes=bottom,
                            forces=[(loaded, np.array([0.0, 0.0, -1.0]))])
    unit_disp, _ = solver.solve(bc)

    # axial compliance at the load footprint defines the rate the spring sees
    u_axial_unit = float(-unit_disp.u[loaded, 2].mean())
    if u_axial_unit <= 0:
        raise RuntimeError("degenerate load case: no axial compliance")
    k_struct = 1.0 / u_axial_unit
    f_applied = (sma.recovery_stroke * sma.rate * k_struct
                 / (sma.rate + k_struct))

    base_u = unit_disp.u * f_applied
    base_disp = DisplacementField(vox.nodes, base_u, unit_disp.iterations,
                                  unit_disp.residual)
    base_strain = element_strains(vox, base_disp)

    frames = []
    top_nodes = vox.nodes[top]
    bottom_normal = np.array([0.0, 0.0, 1.0])
    for p in phases:
        u = base_u * p
        disp = DisplacementField(vox.nodes, u, base_disp.iterations,
                                 base_disp.residual)
        strain = StrainField(base_strain.centers, base_strain.von_mises * p,
                             base_strain.tensor * p)
        cap_u = u[top]
        axial = float(-cap_u[:, 2].mean())
        lat_vec = cap_u[:, :2].mean(axis=0)
        lateral = float(np.linalg.norm(lat_vec))
        normal = _cap_normal(top_nodes, cap_u)
        angle = float(np.degrees(np.arccos(
            np.clip(normal @ bottom_normal, -1.0, 1.0))))
        azimuth = float(np.degrees(np.arctan2(lat_vec[1], lat_vec[0]))) \
            if lateral > 1e-12 else 0.0
        frames.append(ActuationFrame(p, disp, strain, axial, lateral,
                                     angle, azimuth))
    return ActuationResult(mode=mode, frames=frames, structure_rate=k_struct,
                           spring_rate=sma.rate, applied_force=f_applied,
                           voxels=vox)
