"""1D finite-volume simulator for quasilinear parabolic-elliptic chemotaxis.

Simulates u_t = (a(u) u_x - u v_x)_x on (0,1) with no-flux boundaries,
coupled to an elliptic equation for v (either 0 = v_xx - v + u or the
Jaeger-Luckhaus form 0 = v_xx - M + u with zero-mean v), and monitors
energy-type functionals, dissipation and regularity estimates along the
computed trajectory.
"""

from ks1d.core import Grid, ICSpec, ProblemConfig, SolverConfig, Variant
from ks1d.diffusion import DiffusionSpec
from ks1d.stepper import SimState, Status, run

__all__ = [
    "Grid",
    "ICSpec",
    "ProblemConfig",
    "SolverConfig",
    "Variant",
    "DiffusionSpec",
    "SimState",
    "Status",
    "run",
]

__version__ = "0.1.0"
