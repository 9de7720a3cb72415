"""Explicit conservative time stepping for u_t = (a(u) u_x - u v_x)_x.

Face flux: q = dA/dx - u_up * v_x, with the diffusive part written as
first differences of the primitive A(u) (so the no-flux condition on
A(u) is honored exactly) and the advective part upwinded on the sign of
the face velocity v_x.  Boundary faces carry zero flux, which makes the
discrete mass h*sum(u) exactly conserved by telescoping.

The time step is adaptive: diffusive and advective CFL bounds, a 1.2x
growth cap, and halving on positivity rejection.  Termination statuses:

    FINISHED         t reached t_end
    BLOWUP_SUSPECTED max u crossed the configured threshold
    DT_COLLAPSE      rejections pushed dt below dt_min

The accept loop itself is compiled (see _kernels); v is refreshed from
the same tridiagonal systems as the elliptic module after every
accepted step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Protocol

import numpy as np

from ks1d import _kernels
from ks1d.core import Grid, ProblemConfig, SolverConfig, Variant
from ks1d.diffusion import DiffusionSpec
from ks1d.elliptic import solve_jl, solve_standard


class Status(enum.Enum):
    RUNNING = "running"
    FINISHED = "finished"
    BLOWUP_SUSPECTED = "blowup_suspected"
    DT_COLLAPSE = "dt_collapse"


_KERNEL_STATUS = {
    _kernels.STATUS_RUNNING: Status.RUNNING,
    _kernels.STATUS_BLOWUP: Status.BLOWUP_SUSPECTED,
    _kernels.STATUS_DT_COLLAPSE: Status.DT_COLLAPSE,
}


@dataclass(frozen=True)
class SimState:
    """One trajectory point: fields, time, last accepted dt, status."""

    t: float
    u: np.ndarray
    v: np.ndarray
    dt: float
    step: int
    status: Status = Status.RUNNING


class MonitorSink(Protocol):
    def record(self, state: SimState) -> None: ...


def compute_fluxes(u: np.ndarray, v: np.ndarray, grid: Grid, spec: DiffusionSpec) -> np.ndarray:
    """Face fluxes q_{i+1/2} = (A(u_{i+1}) - A(u_i))/h - u_up * (v_{i+1} - v_i)/h.

    Boundary faces are exactly zero.
    """
    h = grid.h
    q = np.zeros(grid.n_cells + 1)
    A = spec.A(u)
    vel = np.diff(v) / h
    u_up = np.where(vel > 0.0, u[:-1], u[1:])
    q[1:-1] = np.diff(A) / h - u_up * vel
    return q


@lru_cache(maxsize=32)
def _elliptic_factor(n_cells: int, jl: bool):
    """Thomas LU of (I - Lap) (standard) or (-Lap, row 0 pinned) (JL)."""
    h = 1.0 / n_cells
    inv_h2 = 1.0 / h**2
    lower = np.full(n_cells, -inv_h2)
    upper = np.full(n_cells, -inv_h2)
    main = np.full(n_cells, 2.0 * inv_h2)
    main[0] = main[-1] = inv_h2
    lower[0] = 0.0
    upper[-1] = 0.0
    if jl:
        main[0] += 1.0
    else:
        main += 1.0
    w, piv = _kernels.thomas_factor(lower, main, upper)
    return w, piv, upper


def _advance(
    state: SimState,
    cfg: SolverConfig,
    grid: Grid,
    problem: ProblemConfig,
    M: float,
    max_steps: int,
    t_end: float = math.inf,
    t_break: float = math.inf,
) -> SimState:
    spec = problem.diffusion
    jl = problem.variant is Variant.JAEGER_LUCKHAUS
    w, piv, upper = _elliptic_factor(grid.n_cells, jl)
    u = state.u.copy()
    v = state.v.copy()
    t, dt_prev, steps, status = _kernels.advance(
        u,
        v,
        state.t,
        state.dt,
        max_steps,
        t_end,
        t_break,
        _kernels.KIND_CODES[spec.kind],
        spec.p,
        spec.singular_at_zero,
        jl,
        M,
        grid.h,
        cfg.cfl_diff,
        cfg.cfl_adv,
        cfg.dt_min,
        cfg.dt_growth,
        cfg.blowup_threshold,
        w,
        piv,
        upper,
    )
    return SimState(
        t=t, u=u, v=v, dt=dt_prev, step=state.step + steps, status=_KERNEL_STATUS[status]
    )


def step(
    state: SimState,
    cfg: SolverConfig,
    grid: Grid,
    problem: ProblemConfig,
    M: float,
    t_end: float = math.inf,
) -> SimState:
    """Advance one accepted step (with positivity-rejection retries)."""
    assert state.status is Status.RUNNING
    return _advance(state, cfg, grid, problem, M, max_steps=1, t_end=t_end)


def initial_state(problem: ProblemConfig, grid: Grid, cfg: SolverConfig) -> SimState:
    u0 = problem.initial_condition.realize(grid)
    if float(np.max(u0)) >= cfg.blowup_threshold:
        raise ValueError("blowup_threshold must exceed the initial max of u")
    M = problem.initial_condition.mass
    if problem.variant is Variant.JAEGER_LUCKHAUS:
        v0 = solve_jl(u0, grid, M)
    else:
        v0 = solve_standard(u0, grid)
    spec = problem.diffusion
    dt0 = cfg.cfl_diff * grid.h**2 / (2.0 * float(np.max(spec.a(u0))))
    vmax = float(np.max(np.abs(np.diff(v0)))) / grid.h
    if vmax > 0.0:
        dt0 = min(dt0, cfg.cfl_adv * grid.h / vmax)
    return SimState(t=0.0, u=u0, v=v0, dt=dt0, step=0)


def run(
    problem: ProblemConfig,
    solver: SolverConfig,
    grid: Grid,
    sink: MonitorSink | None = None,
    snapshot_times=None,
    on_snapshot=None,
) -> SimState:
    """Step from t=0 to t_end or a terminal status, recording every
    record_every accepted steps and at the final state.

    on_snapshot(state, t_requested) fires at the first accepted state
    with t >= t_requested for each entry of snapshot_times.
    """
    state = initial_state(problem, grid, solver)
    M = problem.initial_condition.mass
    pending = sorted(snapshot_times) if snapshot_times else []

    def flush_snapshots(st):
        while pending and st.t >= pending[0] - 1e-14:
            on_snapshot(st, pending.pop(0))

    if sink is not None:
        sink.record(state)
    flush_snapshots(state)
    while state.status is Status.RUNNING and state.t < problem.t_end:
        chunk = solver.record_every - state.step % solver.record_every
        t_break = pending[0] if pending else math.inf
        state = _advance(
            state, solver, grid, problem, M, chunk, t_end=problem.t_end, t_break=t_break
        )
        if state.status is Status.RUNNING and state.t >= problem.t_end:
            state = replace(state, status=Status.FINISHED)
        flush_snapshots(state)
        if sink is not None and (
            state.step % solver.record_every == 0 or state.status is not Status.RUNNING
        ):
            sink.record(state)
    if state.status is Status.RUNNING:
        state = replace(state, status=Status.FINISHED)
    return state
