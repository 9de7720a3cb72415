"""Grids, configuration records and the shared discrete calculus kernels.

Cell-centered finite volumes on the unit interval: n uniform cells of
width h = 1/n with centers x_i = (i + 1/2)h.  A "field" is a plain
numpy array of n cell values; "face arrays" carry n+1 values with the
two boundary faces encoding the no-flux conditions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ks1d.diffusion import DiffusionSpec


class Variant(enum.Enum):
    STANDARD = "standard"
    JAEGER_LUCKHAUS = "jaeger_luckhaus"


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh of (0,1)."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError("n_cells must be >= 4")

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h


def face_gradient(f: np.ndarray, grid: Grid) -> np.ndarray:
    """First differences of f at the n+1 faces; boundary faces are 0.

    Interior face i holds (f_i - f_{i-1})/h, which is the second-order
    approximation of df/dx at the face.  The zero boundary faces encode
    the homogeneous Neumann conditions.
    """
    g = np.zeros(grid.n_cells + 1)
    g[1:-1] = np.diff(f) / grid.h
    return g


def quadrature(f: np.ndarray, grid: Grid) -> float:
    """Midpoint rule for int_0^1 f dx: h * sum(f_i)."""
    return grid.h * float(np.sum(f))


def face_average(f: np.ndarray) -> np.ndarray:
    """Arithmetic means of adjacent cells at the n-1 interior faces."""
    return 0.5 * (f[:-1] + f[1:])


@dataclass(frozen=True)
class ICSpec:
    """Initial-condition family; realized fields are renormalized so the
    discrete mass hits `mass` exactly.

    kinds:
        constant       u0 = mass
        cosine_bump    u0 ~ 1 + amplitude*cos(frequency*pi*x)
        gaussian_bump  u0 ~ floor + exp(-((x-center)/width)^2)
    """

    kind: str
    mass: float
    amplitude: float = 0.5
    frequency: int = 1
    center: float = 0.5
    width: float = 0.1
    floor: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "cosine_bump", "gaussian_bump"):
            raise ValueError(f"unknown IC kind {self.kind!r}")
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.kind == "cosine_bump" and not 0.0 <= self.amplitude < 1.0:
            raise ValueError("cosine_bump amplitude must lie in [0, 1)")
        if self.kind == "gaussian_bump" and self.floor < 0.0:
            raise ValueError("gaussian_bump floor must be >= 0")

    @property
    def strictly_positive(self) -> bool:
        """Whether the realized field is bounded away from zero."""
        if self.kind == "constant":
            return True
        if self.kind == "cosine_bump":
            return self.amplitude < 1.0
        return self.floor > 0.0

    def realize(self, grid: Grid) -> np.ndarray:
        x = grid.cell_centers
        if self.kind == "constant":
            u = np.full(grid.n_cells, self.mass)
        elif self.kind == "cosine_bump":
            u = 1.0 + self.amplitude * np.cos(self.frequency * np.pi * x)
        else:
            u = self.floor + np.exp(-(((x - self.center) / self.width) ** 2))
        return u * (self.mass / quadrature(u, grid))


@dataclass(frozen=True)
class ProblemConfig:
    """Model selection: variant, nonlinearity, initial data, final time."""

    variant: Variant
    diffusion: DiffusionSpec
    initial_condition: ICSpec
    t_end: float

    def __post_init__(self):
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.diffusion.singular_at_zero and not self.initial_condition.strictly_positive:
            raise ValueError(
                "singular diffusion requires an initial condition bounded "
                "away from zero (min u0 >= m0 > 0)"
            )


@dataclass(frozen=True)
class SolverConfig:
    """Explicit stepping controls."""

    cfl_diff: float = 0.4
    cfl_adv: float = 0.9
    dt_min: float = 1e-12
    blowup_threshold: float = 1e6
    record_every: int = 10
    dt_growth: float = field(default=1.2, repr=False)

    def __post_init__(self):
        if not 0.0 < self.cfl_diff <= 1.0:
            raise ValueError("cfl_diff must lie in (0, 1]")
        if not 0.0 < self.cfl_adv <= 1.0:
            raise ValueError("cfl_adv must lie in (0, 1]")
        if self.dt_min <= 0.0:
            raise ValueError("dt_min must be positive")
        if self.blowup_threshold <= 0.0:
            raise ValueError("blowup_threshold must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
