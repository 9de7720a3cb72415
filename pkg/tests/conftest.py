import numpy as np
import pytest

from ks1d.core import Grid, quadrature


def random_smooth_field(grid: Grid, mass: float, rng, n_modes: int = 4, rough: float = 1.0):
    """Strictly positive C-infinity field with Neumann-compatible modes,
    renormalized to the requested discrete mass."""
    x = grid.cell_centers
    f = np.zeros_like(x)
    for k in range(1, n_modes + 1):
        f += rng.uniform(-1.0, 1.0) * rough / k**2 * np.cos(k * np.pi * x)
    u = np.exp(f)
    return u * (mass / quadrature(u, grid))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
