"""Elliptic solves for the chemoattractant v, given the cell density u.

Standard variant:   0 = v_xx - v + u        (no-flux)
Jaeger-Luckhaus:    0 = v_xx - M + u        (no-flux, int v = 0)

Both are discretized with the same zero-flux face Laplacian used
everywhere else in the package.  The tridiagonal matrices depend only on
the grid, so each is factorized once (banded Cholesky of the negated,
SPD system) and the factor is reused across the whole trajectory.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from ks1d.core import Grid, quadrature


class PivotError(RuntimeError):
    """Direct elimination broke down (defensive; cannot occur for the
    diagonally dominant standard matrix)."""


class CompatibilityError(ValueError):
    """Neumann problem v_xx = M - u is unsolvable: quadrature(u) != M."""


def laplacian(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Cell-centered zero-flux Laplacian: divergence of the face gradients."""
    h = grid.h
    g = np.zeros(grid.n_cells + 1)
    g[1:-1] = np.diff(f) / h
    return np.diff(g) / h


def _spd_band(grid: Grid, jl: bool) -> np.ndarray:
    """Upper band of the negated system matrix.

    Standard: -(Lap - I).  JL: -Lap with the first row augmented by +1
    to pin v_0 and remove the constant null space.
    """
    n, h = grid.n_cells, grid.h
    inv_h2 = 1.0 / h**2
    ab = np.zeros((2, n))
    ab[0, 1:] = -inv_h2
    ab[1, :] = 2.0 * inv_h2
    ab[1, 0] = ab[1, -1] = inv_h2  # zero-flux boundary faces
    if jl:
        ab[1, 0] += 1.0
    else:
        ab[1, :] += 1.0
    return ab


@lru_cache(maxsize=32)
def _factor(n_cells: int, jl: bool):
    ab = _spd_band(Grid(n_cells), jl)
    try:
        return cholesky_banded(ab, lower=False)
    except LinAlgError as exc:  # defensive: both matrices are SPD
        raise PivotError(str(exc)) from exc


def solve_standard(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Solve 0 = v_xx - v + u with no-flux boundaries."""
    return cho_solve_banded((_factor(grid.n_cells, False), False), u)


def solve_jl(u: np.ndarray, grid: Grid, M: float) -> np.ndarray:
    """Solve 0 = v_xx - M + u with no-flux boundaries and zero mean.

    The pinned row forces v_0 = 0 in the raw solve (the rhs sums to ~0
    under the compatibility condition), and the result is shifted to
    zero discrete mean.
    """
    if abs(quadrature(u, grid) - M) > 1e-8:
        raise CompatibilityError(
            f"quadrature(u) = {quadrature(u, grid)!r} differs from M = {M!r}"
        )
    v = cho_solve_banded((_factor(grid.n_cells, True), False), u - M)
    return v - quadrature(v, grid)
