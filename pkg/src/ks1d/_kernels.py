"""Numba-compiled inner loop of the explicit stepper.

The per-step work (CFL bound, fluxes, positivity retries, tridiagonal
elliptic refresh) is a handful of O(n) passes; at desk-scale n the
numpy version is call-overhead bound, so the whole accept loop lives
here.  Everything is numerically identical to the formulas in
stepper/elliptic: the elliptic refresh solves the same tridiagonal
system, factored once per grid.

Diffusion kinds are passed as integer codes:
    0 inverse_u, 1 inverse_one_plus_u, 2 power_one_plus_u, 3 power_u
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_RUNNING = 0
STATUS_BLOWUP = 2
STATUS_DT_COLLAPSE = 3

KIND_CODES = {"inverse_u": 0, "inverse_one_plus_u": 1, "power_one_plus_u": 2, "power_u": 3}


@njit(cache=True)
def a_eval(kind: int, p: float, u: float) -> float:
    if kind == 0:
        return 1.0 / u
    if kind == 1:
        return 1.0 / (1.0 + u)
    if kind == 2:
        return (1.0 + u) ** p
    return u**p


@njit(cache=True)
def A_eval(kind: int, p: float, u: float) -> float:
    if kind == 0:
        return np.log(u)
    if kind == 1:
        return np.log((1.0 + u) / 2.0)
    if kind == 2:
        if p == -1.0:
            return np.log((1.0 + u) / 2.0)
        q = p + 1.0
        return ((1.0 + u) ** q - 2.0**q) / q
    if p == -1.0:
        return np.log(u)
    q = p + 1.0
    return (u**q - 1.0) / q


@njit(cache=True)
def thomas_factor(lower, main, upper):
    """LU of a tridiagonal matrix: multipliers w and pivots piv."""
    n = main.shape[0]
    w = np.zeros(n)
    piv = np.zeros(n)
    piv[0] = main[0]
    for i in range(1, n):
        w[i] = lower[i] / piv[i - 1]
        piv[i] = main[i] - w[i] * upper[i - 1]
    return w, piv


@njit(cache=True)
def thomas_solve(w, piv, upper, rhs, out):
    n = rhs.shape[0]
    out[0] = rhs[0]
    for i in range(1, n):
        out[i] = rhs[i] - w[i] * out[i - 1]
    out[n - 1] = out[n - 1] / piv[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = (out[i] - upper[i] * out[i + 1]) / piv[i]


@njit(cache=True)
def refresh_v(u, v, w, piv, upper, rhs_buf, h, jl, M):
    n = u.shape[0]
    if jl:
        for i in range(n):
            rhs_buf[i] = u[i] - M
    else:
        for i in range(n):
            rhs_buf[i] = u[i]
    thomas_solve(w, piv, upper, rhs_buf, v)
    if jl:
        mean = 0.0
        for i in range(n):
            mean += v[i]
        mean *= h
        for i in range(n):
            v[i] -= mean


@njit(cache=True)
def advance(
    u,
    v,
    t,
    dt_prev,
    max_steps,
    t_end,
    t_break,
    kind,
    p,
    singular,
    jl,
    M,
    h,
    cfl_diff,
    cfl_adv,
    dt_min,
    dt_growth,
    blowup_threshold,
    w,
    piv,
    upper,
):
    """Advance up to max_steps accepted steps in place.

    Stops early at t >= t_end, t >= t_break (snapshot boundary), or a
    terminal status.  Returns (t, dt_prev, steps_done, status).
    """
    n = u.shape[0]
    A = np.empty(n)
    divq = np.empty(n)
    u_new = np.empty(n)
    rhs_buf = np.empty(n)
    steps = 0
    status = STATUS_RUNNING
    while steps < max_steps and t < t_end:
        amax = 0.0
        for i in range(n):
            ai = a_eval(kind, p, u[i])
            if ai > amax:
                amax = ai
            A[i] = A_eval(kind, p, u[i])
        dt = cfl_diff * h * h / (2.0 * amax)
        if dt_growth * dt_prev < dt:
            dt = dt_growth * dt_prev
        vmax = 0.0
        for i in range(n - 1):
            dv = abs(v[i + 1] - v[i]) / h
            if dv > vmax:
                vmax = dv
        if vmax > 0.0 and cfl_adv * h / vmax < dt:
            dt = cfl_adv * h / vmax
        if t + dt > t_end:
            dt = t_end - t

        # divergence of the face fluxes (boundary faces are zero)
        q_prev = 0.0
        for i in range(n):
            if i < n - 1:
                vel = (v[i + 1] - v[i]) / h
                u_up = u[i] if vel > 0.0 else u[i + 1]
                q = (A[i + 1] - A[i]) / h - u_up * vel
            else:
                q = 0.0
            divq[i] = (q - q_prev) / h
            q_prev = q

        collapsed = False
        while True:
            ok = True
            for i in range(n):
                un = u[i] + dt * divq[i]
                u_new[i] = un
                if (singular and un <= 0.0) or (not singular and un < 0.0):
                    ok = False
                    break
            if ok:
                break
            dt *= 0.5
            if dt < dt_min:
                collapsed = True
                break
        if collapsed:
            status = STATUS_DT_COLLAPSE
            break

        for i in range(n):
            u[i] = u_new[i]
        refresh_v(u, v, w, piv, upper, rhs_buf, h, jl, M)
        t += dt
        dt_prev = dt
        steps += 1

        umax = 0.0
        for i in range(n):
            au = abs(u[i])
            if au > umax:
                umax = au
        if umax > blowup_threshold:
            status = STATUS_BLOWUP
            break
        if t >= t_break:
            break
    return t, dt_prev, steps, status
