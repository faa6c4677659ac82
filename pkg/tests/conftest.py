import numpy as np
import pytest

from rieszw.mesh import Mesh, StepFunction


@pytest.fixture
def unit_mesh():
    """[0,1) at L=6, standard coarse padding."""
    return Mesh(1, 0, 6)


@pytest.fixture
def tight_mesh():
    """[0,1) at L=3 with no padding levels."""
    return Mesh(1, 0, 3, coarse_padding=0)


def lognormal(mesh: Mesh, seed: int, scale: float = 1.0) -> StepFunction:
    rng = np.random.default_rng(seed)
    shape = (mesh.cells_per_axis,) * mesh.n
    return StepFunction(mesh, np.exp(scale * rng.standard_normal(shape)))
