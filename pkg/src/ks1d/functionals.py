"""Energy-type functionals, dissipation, estimate checks and monitors.

The central objects along a trajectory (u, v):

    F  = 1/2 int (a(u))^2/u |u_x|^2 - int u A(u)
    D  = int u a(u) | (a(u)/u u_x)_x - v_xx + v/2 |^2
    S  = int u a(u) v^2 / 4

which satisfy dF/dt + D = S in the standard variant.  The
Jaeger-Luckhaus variant carries the exact-dissipation pair

    F0 = 1/2 int (a(u))^2/u |u_x|^2 + int (-A(u) + M At(u)) u
    D0 = int u a(u) | (a(u)/u u_x)_x - v_xx |^2

with dF0/dt + D0 = 0.  audit_energy time-differences these along a
recorded trajectory; check_regest evaluates the lower/upper estimate
inequalities for the two critical nonlinearities.

Discretization conventions: face values of u are arithmetic means of the
adjacent cells, gradients are face differences, and every second
derivative reuses the zero-flux Laplacian of the elliptic solver, so
v_xx here is consistent with the v the solver produced.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Sequence

import numpy as np

from ks1d.core import Grid, ProblemConfig, Variant, face_average, quadrature
from ks1d.diffusion import DiffusionSpec
from ks1d.elliptic import laplacian
from ks1d.stepper import SimState


def grad_energy_term(u: np.ndarray, spec: DiffusionSpec, grid: Grid) -> float:
    """int (a(u))^2/u |u_x|^2 via interior faces (full term, no 1/2)."""
    uf = face_average(u)
    g = np.diff(u) / grid.h
    weight = np.zeros_like(uf)
    pos = uf > 0.0
    weight[pos] = spec.a(uf[pos]) ** 2 / uf[pos]
    return grid.h * float(np.sum(weight * g**2))


def _inner_gradient_divergence(u: np.ndarray, spec: DiffusionSpec, grid: Grid) -> np.ndarray:
    """Cell divergence of the face field (a(u)/u) u_x, zero-flux faces."""
    uf = face_average(u)
    w = np.zeros(grid.n_cells + 1)
    pos = uf > 0.0
    w[1:-1][pos] = spec.a(uf[pos]) / uf[pos] * (np.diff(u)[pos] / grid.h)
    return np.diff(w) / grid.h


def eval_F(u: np.ndarray, spec: DiffusionSpec, grid: Grid) -> float:
    """Lyapunov-like functional F(u)."""
    return 0.5 * grad_energy_term(u, spec, grid) - quadrature(u * spec.A(u), grid)


def eval_D(u: np.ndarray, v: np.ndarray, spec: DiffusionSpec, grid: Grid) -> float:
    """Dissipation D(u, v) >= 0 of the standard variant."""
    r = _inner_gradient_divergence(u, spec, grid) - laplacian(v, grid) + 0.5 * v
    return quadrature(spec.b(u) * r**2, grid)


def eval_source(u: np.ndarray, v: np.ndarray, spec: DiffusionSpec, grid: Grid) -> float:
    """Source term int u a(u) v^2 / 4 >= 0."""
    return quadrature(spec.b(u) * v**2, grid) / 4.0


def eval_F0(u: np.ndarray, spec: DiffusionSpec, grid: Grid, M: float) -> float:
    """Jaeger-Luckhaus Lyapunov functional F0(u)."""
    inner = -spec.A(u) + M * spec.A_tilde(u)
    return 0.5 * grad_energy_term(u, spec, grid) + quadrature(inner * u, grid)


def eval_D0(u: np.ndarray, v: np.ndarray, spec: DiffusionSpec, grid: Grid) -> float:
    """Exact dissipation D0(u, v) >= 0 of the Jaeger-Luckhaus variant."""
    r = _inner_gradient_divergence(u, spec, grid) - laplacian(v, grid)
    return quadrature(spec.b(u) * r**2, grid)


def entropy(u: np.ndarray, spec: DiffusionSpec, grid: Grid) -> float:
    """int u |log u| (inverse_u and default) or int u log(1+u)."""
    if spec.kind == "inverse_one_plus_u":
        return quadrature(u * np.log1p(u), grid)
    val = np.zeros_like(u)
    pos = u > 0.0
    val[pos] = u[pos] * np.abs(np.log(u[pos]))
    return quadrature(val, grid)


def norms(u: np.ndarray, v: np.ndarray, spec: DiffusionSpec, grid: Grid, p: float = 2.0):
    """(u_linf, u_l3, v_lp, entropy, grad_seminorm) of one state."""
    u_linf = float(np.max(np.abs(u)))
    u_l3 = quadrature(u**3, grid) ** (1.0 / 3.0)
    v_lp = quadrature(np.abs(v) ** p, grid) ** (1.0 / p)
    return u_linf, u_l3, v_lp, entropy(u, spec, grid), grad_energy_term(u, spec, grid)


def check_regest(u: np.ndarray, spec: DiffusionSpec, grid: Grid, M: float):
    """Slacks of the lower/upper regularity estimates at one state.

    slack1: F(u) minus its proved lower bound in terms of the gradient
    term and M; slack2: proved upper bound for the entropy minus the
    entropy.  Both are expected nonnegative for any admissible field of
    mass M, not only along trajectories.
    """
    G = grad_energy_term(u, spec, grid)
    F = eval_F(u, spec, grid)
    ent = entropy(u, spec, grid)
    if spec.kind == "inverse_u":
        slack1 = F - (0.25 * G - M * np.log(M) - M**3)
        slack2 = (2.0 + M * np.log(M) + M**1.5 * np.sqrt(G)) - ent
    elif spec.kind == "inverse_one_plus_u":
        slack1 = F - (0.25 * G - M * np.log1p(M) - M**3)
        slack2 = (M**3 + M * np.log1p(M) + 0.25 * G) - ent
    else:
        raise ValueError("regularity estimates apply to the critical kinds only")
    return float(slack1), float(slack2)


def key_identity_residual(
    phi: Callable[[np.ndarray], np.ndarray], spec: DiffusionSpec, grid: Grid
) -> float:
    """Max interior defect of the pointwise identity

        phi d/dx M(phi) = d/dx( phi a(phi) d/dx( a(phi)/phi phi_x ) )

    with M(phi) = a a'/phi |phi_x|^2 - a^2/(2 phi^2) |phi_x|^2
    + a^2/phi phi_xx, evaluated with the standard stencils on a strictly
    positive C^3 sample.  Two cells are trimmed at each boundary; the
    continuum identity is exact, so what remains is truncation error.
    """
    f = np.asarray(phi(grid.cell_centers), dtype=float)
    h = grid.h
    a = spec.a(f)
    ap = spec.a_prime(f)
    dphi = np.gradient(f, h, edge_order=2)
    d2phi = laplacian(f, grid)
    m = (a * ap / f) * dphi**2 - a**2 / (2.0 * f**2) * dphi**2 + a**2 / f * d2phi
    lhs = f * np.gradient(m, h, edge_order=2)

    s = _inner_gradient_divergence(f, spec, grid)
    ff = face_average(f)
    flux = np.zeros(grid.n_cells + 1)
    flux[1:-1] = ff * spec.a(ff) * face_average(s)
    rhs = np.diff(flux) / h

    return float(np.max(np.abs(lhs[2:-2] - rhs[2:-2])))


@dataclass
class MonitorRecord:
    """Scalar diagnostics of one accepted step; serializes to one CSV row."""

    t: float
    mass: float
    F: float
    D: float
    source: float
    F0: float | None
    D0: float | None
    entropy: float
    grad_seminorm: float
    u_linf: float
    u_l3: float
    v_lp: float
    energy_residual: float | None
    regest1_slack: float | None
    regest2_slack: float | None


CSV_COLUMNS = tuple(f.name for f in fields(MonitorRecord))


class TrajectoryMonitor:
    """MonitorSink that turns states into MonitorRecords.

    energy_residual in record n is the discrete balance defect between
    records n-1 and n (empty in the first record); run the trajectory
    with record_every=1 for a per-step audit.
    """

    def __init__(self, problem: ProblemConfig, grid: Grid, v_lp_p: float = 2.0):
        self.problem = problem
        self.grid = grid
        self.v_lp_p = v_lp_p
        self.records: list[MonitorRecord] = []
        self._jl = problem.variant is Variant.JAEGER_LUCKHAUS
        self._critical = problem.diffusion.kind in ("inverse_u", "inverse_one_plus_u")
        self._M = problem.initial_condition.mass

    def record(self, state: SimState) -> None:
        spec, grid = self.problem.diffusion, self.grid
        u, v = state.u, state.v
        F = eval_F(u, spec, grid)
        D = eval_D(u, v, spec, grid)
        source = eval_source(u, v, spec, grid)
        F0 = D0 = None
        if self._jl:
            F0 = eval_F0(u, spec, grid, self._M)
            D0 = eval_D0(u, v, spec, grid)
        u_linf, u_l3, v_lp, ent, seminorm = norms(u, v, spec, grid, self.v_lp_p)
        slack1 = slack2 = None
        if self._critical:
            slack1, slack2 = check_regest(u, spec, grid, self._M)
        rec = MonitorRecord(
            t=state.t,
            mass=quadrature(u, grid),
            F=F,
            D=D,
            source=source,
            F0=F0,
            D0=D0,
            entropy=ent,
            grad_seminorm=seminorm,
            u_linf=u_linf,
            u_l3=u_l3,
            v_lp=v_lp,
            energy_residual=None,
            regest1_slack=slack1,
            regest2_slack=slack2,
        )
        if self.records:
            prev = self.records[-1]
            dt = rec.t - prev.t
            if dt > 0.0:
                if self._jl:
                    rec.energy_residual = (rec.F0 - prev.F0) / dt + 0.5 * (rec.D0 + prev.D0)
                else:
                    rec.energy_residual = (
                        (rec.F - prev.F) / dt
                        + 0.5 * (rec.D + prev.D)
                        - 0.5 * (rec.source + prev.source)
                    )
        self.records.append(rec)


def audit_energy(records: Sequence[MonitorRecord], mode: Variant) -> tuple[np.ndarray, float]:
    """Discrete energy-balance residual series between consecutive records.

    residual_n = (F_{n+1} - F_n)/dt + D_{n+1/2} - S_{n+1/2}, with
    midpoint averages of the endpoint evaluations; the JL mode uses
    (F0, D0) and zero source.  Returns (series, max abs).
    """
    res = []
    for prev, cur in zip(records, records[1:]):
        dt = cur.t - prev.t
        if dt <= 0.0:
            continue
        if mode is Variant.JAEGER_LUCKHAUS:
            res.append((cur.F0 - prev.F0) / dt + 0.5 * (cur.D0 + prev.D0))
        else:
            res.append(
                (cur.F - prev.F) / dt
                + 0.5 * (cur.D + prev.D)
                - 0.5 * (cur.source + prev.source)
            )
    series = np.array(res)
    return series, float(np.max(np.abs(series))) if len(series) else 0.0
