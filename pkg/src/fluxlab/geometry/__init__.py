from .mesh import TriMesh, load_mesh, save_stl, mesh_volume, surface_area
from .grid import Plane, ScalarGrid, sdf_union, sdf_intersect, sdf_subtract
from .sdf import mesh_to_sdf, extract_isosurface, EmptyLevelSetError
from .slicing import slice_section, CrossSection
from . import primitives

__all__ = [
    "TriMesh",
    "load_mesh",
    "save_stl",
    "mesh_volume",
    "surface_area",
    "Plane",
    "ScalarGrid",
    "sdf_union",
    "sdf_intersect",
    "sdf_subtract",
    "mesh_to_sdf",
    "extract_isosurface",
    "EmptyLevelSetError",
    "slice_section",
    "CrossSection",
    "primitives",
]
