from .lattice import (GyroidSpec, gyroid_field, gyroid_gradient, lattice_sdf,
                      solidity_of_spec, cell_size_for_solidity,
                      elasticity_to_solidity, SOLIDITY_RANGE)
from .channel import ChannelPath, ChannelError, SegmentSelection, compute_channel_axis
from .shell import HelixShellSpec, HelixShell, generate_helix_shell
from .anchor import AnchorSpec, generate_anchor, AnchorError
from .compose import (FluxIOModel, Composition, SocketSpec, build_fluxio_model,
                      compose_fluxio, compose_grid, measure_channel_diameter,
                      measure_lattice_solidity, CompositionError)
from .printability import printability_report

__all__ = [
    "GyroidSpec", "gyroid_field", "gyroid_gradient", "lattice_sdf",
    "solidity_of_spec", "cell_size_for_solidity", "elasticity_to_solidity",
    "SOLIDITY_RANGE",
    "ChannelPath", "ChannelError", "SegmentSelection", "compute_channel_axis",
    "HelixShellSpec", "HelixShell", "generate_helix_shell",
    "AnchorSpec", "generate_anchor", "AnchorError",
    "FluxIOModel", "Composition", "SocketSpec", "build_fluxio_model",
    "compose_fluxio", "compose_grid", "measure_channel_diameter",
    "measure_lattice_solidity", "CompositionError",
    "printability_report",
]
