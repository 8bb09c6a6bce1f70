import numpy as np
import pytest

from kinelab import geometry as G


@pytest.fixture(scope="session")
def halfline():
    return G.germ([G.build_cone([[1.0, 0.0]])], label="halfline")


@pytest.fixture(scope="session")
def quadrant():
    return G.germ([G.build_cone([[1.0, 0.0], [0.0, 1.0]])], label="quadrant")


@pytest.fixture(scope="session")
def fullplane():
    return G.full_space_germ(2, "fullplane")


@pytest.fixture(scope="session")
def xline():
    return G.flat_cone_union([[1.0, 0.0]], 2, "xline")


@pytest.fixture(scope="session")
def octant():
    return G.germ([G.build_cone(np.eye(3))], label="octant")
