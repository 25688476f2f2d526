"""Printability and actuation-envelope report.

Checks the three fabrication constraints: 1.0 mm minimum wall, support-free
overhang budget (45 degrees), and the 60 mm segment diameter actuation
limit, plus the 11-15% lattice solidity window when the composition is
available.  Report-only: nothing here raises on a failed check.
"""

from __future__ import annotations

import numpy as np

from ..geometry.grid import Plane, ScalarGrid
from ..geometry.mesh import TriMesh, NotWatertightError, surface_area
from ..geometry.sdf import mesh_to_sdf
from ..geometry.slicing import slice_section
from .compose import Composition, measure_channel_diameter, \
    measure_lattice_solidity, MAX_SEGMENT_DIAMETER
from .lattice import GyroidSpec, gyroid_field, gyroid_gradient, \
    solidity_of_spec, SOLIDITY_RANGE

MIN_WALL = 1.0  # mm, thinnest feature the resin prints reliably
OVERHANG_DEG = 45.0  # steeper down-facing surface needs support


def _overhang_fraction(mesh: TriMesh) -> float:
    """Area fraction of down-facing surface steeper than 45 degrees."""
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    v1 = mesh.vertices[mesh.triangles[:, 1]]
    v2 = mesh.vertices[mesh.triangles[:, 2]]
    n = np.cross(v1 - v0, v2 - v0)
    areas = 0.5 * np.linalg.norm(n, axis=1)
    nz = np.divide(n[:, 2], 2 * areas, out=np.zeros(len(n)),
                   where=areas > 0)
    steep = nz < -np.cos(np.radians(OVERHANG_DEG))
    total = areas.sum()
    return float(areas[steep].sum() / total) if total > 0 else 0.0


def _max_section_diameter(mesh: TriMesh, axis: np.ndarray,
                          origin: np.ndarray, length: float,
                          n_stations: int = 9) -> float:
    worst = 0.0
    for s in np.linspace(0.05, 0.95, n_stations) * length:
        sections = slice_section(mesh, Plane(origin + s * axis, axis))
        for sec in sections:
            spread = sec.polygon - sec.centroid
            worst = max(worst, 2.0 * float(
                np.linalg.norm(spread, axis=1).max()))
    return worst


def _wall_thickness_lattice(comp: Composition, n_samples: int = 4000,
                            seed: int = 0) -> np.ndarray:
    """Normal thickness of lattice walls sampled on the gyroid mid-surface.

    Sampling stays clear of region boundaries (channel, shell, planes) so
    clipped walls do not read as thin spots.
    """
    rng = np.random.default_rng(seed)
    grid = comp.grid
    model = comp.model
    lo = grid.origin + 2 * grid.spacing
    hi = grid.max_corner - 2 * grid.spacing
    spec = model.gyroid
    pts = lo + rng.random((n_samples * 30, 3)) * (hi - lo)
    # keep points near the gyroid mid-surface, interior to the lattice region
    g = gyroid_field(pts, spec.cell_size)
    grad = gyroid_gradient(pts, spec.cell_size)
    gn = np.linalg.norm(grad, axis=1)
    near = np.abs(g) / np.maximum(gn, 1e-9) < 0.1 * spec.wall
    pts, grad, gn = pts[near], grad[near], gn[near]
    margin = 2.0
    keep = (comp.body.sample(pts) < -margin)
    keep &= model.selection.slab_sdf(pts) < -margin
    keep &= model.channel.sdf(pts) > margin
    keep &= comp.shell.grid.sample(pts) > margin
    if comp.anchor_values is not None:
        anchor_grid = comp.body.with_values(
            comp.anchor_values.reshape(grid.dims))
        keep &= anchor_grid.sample(pts) > margin
    pts, grad, gn = pts[keep][:n_samples], grad[keep][:n_samples], \
        gn[keep][:n_samples]
    if len(pts) == 0:
        return np.asarray([])
    normals = grad / gn[:, None]

    def exit_distance(sign):
        lo_t = np.zeros(len(pts))
        hi_t = np.full(len(pts), 1.5 * spec.wall)
        for _ in range(40):
            mid = 0.5 * (lo_t + hi_t)
            inside = grid.sample(pts + sign * mid[:, None] * normals) <= 0
            lo_t = np.where(inside, mid, lo_t)
            hi_t = np.where(inside, hi_t, mid)
        return 0.5 * (lo_t + hi_t)

    return exit_distance(+1.0) + exit_distance(-1.0)


def _wall_thickness_voxel(mesh: TriMesh, voxel: float = 0.4) -> float:
    """Coarse mesh-only wall estimate: doubled interior EDT at medial voxels."""
    from scipy import ndimage
    grid = mesh_to_sdf(mesh, voxel)
    inside = grid.values < 0
    edt = ndimage.distance_transform_edt(inside, sampling=voxel)
    local_max = (edt == ndimage.maximum_filter(edt, size=3)) & inside
    core = local_max & (edt > voxel)
    if not core.any():
        return 0.0
    return float(2.0 * edt[core].min())


def printability_report(target: Composition | TriMesh) -> dict:
    """Build the printability report for a composition or a bare mesh."""
    checks: dict = {"schema_version": 1, "warnings": []}
    if isinstance(target, Composition):
        comp = target
        if comp.main is not None:
            mesh = comp.main
        else:  # grid-only composition: measure the unsplit composite
            from ..geometry.sdf import extract_isosurface
            mesh = extract_isosurface(comp.grid)
        model = comp.model
        walls = _wall_thickness_lattice(comp)
        min_wall = float(walls.min()) if len(walls) else float("nan")
        checks["wall_samples"] = int(len(walls))
        sol = measure_lattice_solidity(comp)
        spec_sol = solidity_of_spec(model.gyroid)
        lo, hi = SOLIDITY_RANGE
        checks["solidity"] = {
            "measured": sol,
            "spec": spec_sol,
            "cell_size_mm": model.gyroid.cell_size,
            "window": [lo, hi],
            "pass": bool(lo - 0.005 <= sol <= hi + 0.005),
        }
        if spec_sol < lo:
            checks["warnings"].append(
                f"lattice solidity {spec_sol:.3f} below the "
                f"{lo:.0%} printability window: cells too large to print "
                f"without support")
        elif spec_sol > hi:
            checks["warnings"].append(
                f"lattice solidity {spec_sol:.3f} above the {hi:.0%} window: "
                f"too rigid for the embedded spring")
        dia = measure_channel_diameter(comp)
        checks["channel_diameter_mm"] = {
            "mean": float(dia.mean()), "min": float(dia.min()),
            "max": float(dia.max()),
        }
        checks["helix"] = {
            "pitch_mm": comp.shell.pitch,
            "starts": comp.shell.starts,
            "cable_gap_mm": comp.shell.pitch / comp.shell.starts,
            "wire_diameter_mm": comp.model.shell.wire_diameter,
        }
        seg_diameter = 2.0 * comp.shell.mean_radius
        for w in comp.warnings:
            checks["warnings"].append(w)
    else:
        mesh = target
        if not mesh.watertight:
            raise NotWatertightError("printability needs a watertight mesh")
        min_wall = _wall_thickness_voxel(mesh)
        lo_b, hi_b = mesh.bounds
        axis = np.zeros(3)
        axis[int(np.argmax(hi_b - lo_b))] = 1.0
        seg_diameter = _max_section_diameter(
            mesh, axis, lo_b, float((hi_b - lo_b) @ axis))

    checks["min_wall_mm"] = min_wall
    checks["wall_pass"] = bool(min_wall >= MIN_WALL)
    checks["overhang_fraction"] = _overhang_fraction(mesh)
    checks["segment_diameter_mm"] = seg_diameter
    checks["diameter_pass"] = bool(seg_diameter <= MAX_SEGMENT_DIAMETER)
    if not checks["diameter_pass"]:
        checks["warnings"].append(
            f"segment diameter {seg_diameter:.1f} mm exceeds the "
            f"{MAX_SEGMENT_DIAMETER:.0f} mm actuation limit")
    checks["surface_area_mm2"] = surface_area(mesh)
    return checks
