from .sma import SmaSpringParams, sma_contraction
from .hexmesh import VoxelModel, VoxelizationError
from .solver import (MaterialParams, BoundaryConditions, DisplacementField,
                     StrainField, solve_static, SolverError)
from .simulate import simulate_actuation, ActuationResult, ActuationFrame
from .colormap import strain_colormap, color_warmth

__all__ = [
    "SmaSpringParams", "sma_contraction",
    "VoxelModel", "VoxelizationError",
    "MaterialParams", "BoundaryConditions", "DisplacementField",
    "StrainField", "solve_static", "SolverError",
    "simulate_actuation", "ActuationResult", "ActuationFrame",
    "strain_colormap", "color_warmth",
]
