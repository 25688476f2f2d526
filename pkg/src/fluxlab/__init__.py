"""FluxLab: design, preview, sense and control SMA-driven shape-changing prints.

The package is organized around the pipeline stages:

- ``fluxlab.geometry``     meshes, scalar grids, SDF conversion, slicing
- ``fluxlab.structuregen`` FluxIO composition: channel, lattice, shell, anchors
- ``fluxlab.fea``          voxel finite-element deformation preview
- ``fluxlab.signal``       coil inductance model, gesture synthesis, framing
- ``fluxlab.classify``     windowing, recurrent classifier, training, export
- ``fluxlab.control``      time-multiplexed sense/actuate controller simulation
- ``fluxlab.server``       HTTP/WebSocket facade for the studio UI
- ``fluxlab.cli``          batch command line entry point

All lengths are millimeters, all masses grams, all temperatures Celsius.
"""

__version__ = "0.1.0"
