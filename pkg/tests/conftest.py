import warnings

import numpy as np
import pytest

from fluxlab.geometry import Plane, primitives
from fluxlab.structuregen import (SegmentSelection, build_fluxio_model,
                                  compose_fluxio)


@pytest.fixture(scope="session")
def cylinder50():
    """The fabrication-test specimen: 50 mm cylinder, 32 mm converted span."""
    return primitives.cylinder(25.0, 64.0, segments=96)


@pytest.fixture(scope="session")
def selection32():
    return SegmentSelection(Plane((0, 0, -16), (0, 0, 1)),
                            Plane((0, 0, 16), (0, 0, -1)))


@pytest.fixture(scope="session")
def composed_default(cylinder50, selection32):
    """Default composed fixture (elasticity 0.5 -> solidity 0.13)."""
    model = build_fluxio_model(cylinder50, selection32, elasticity=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return compose_fluxio(model, voxel=0.5)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240809)
