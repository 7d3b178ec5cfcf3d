import numpy as np
import pytest

from mushroom.eigensolver import DiscretizationSpec, solve
from mushroom.geometry import MushroomGeometry
from mushroom.specfun import ZeroCache


@pytest.fixture(scope="session")
def g():
    return MushroomGeometry(1.0, 2.0, 1.0)


@pytest.fixture(scope="session")
def zcache(tmp_path_factory):
    return ZeroCache(tmp_path_factory.mktemp("zeros") / "bessel_zeros.csv")


@pytest.fixture(scope="session")
def mushroom_basis40(g):
    """Medium-resolution mushroom eigenbasis with vectors, shared."""
    return solve(g, DiscretizationSpec(h=1 / 40), count=40)


@pytest.fixture(scope="session")
def random_interior_points(g):
    rng = np.random.default_rng(11)
    pts = []
    while len(pts) < 4000:
        x = rng.uniform(-g.r2, g.r2)
        y = rng.uniform(-g.t, g.r2)
        if g.contains(x, y):
            pts.append((x, y))
    return np.array(pts)
